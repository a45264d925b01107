from __future__ import annotations

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from volumenes.cli import main as cli_main
from volumenes.structure_file import BUILTIN_TEXT


def main() -> int:
    p = argparse.ArgumentParser(description="Ejecuta `verify` sobre todas las familias incorporadas")
    p.add_argument("--full", action="store_true", help="Incluye las comprobaciones lentas")
    p.add_argument("--no-store", action="store_true")
    args = p.parse_args()

    failed: list[str] = []
    for family in BUILTIN_TEXT:
        argv = ["verify", "--family", family]
        if args.full:
            argv.append("--full")
        if args.no_store:
            argv.append("--no-store")
        print(f"== {family}", flush=True)
        code = cli_main(argv)
        if code != 0:
            failed.append(family)

    if failed:
        print(f"FALLO: {', '.join(failed)}")
        return 1
    print("OK: todas las familias pasan")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
