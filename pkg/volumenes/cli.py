"""Interfaz de línea de comandos: invariants, ball-volume, fit, verify, trace, history."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from sqlalchemy.exc import SQLAlchemyError

from volumenes.connection import verify_sec_identity
from volumenes.contact import ORIGIN, ContactStructure, NormalFormSpec, chi_at, derive, kappa_at, popp_density
from volumenes.db import run_store
from volumenes.errors import ConfigError, VolumenesError
from volumenes.geodesic import CylCovector, integrate, trace_to_csv
from volumenes.services import RunService, RunSummary, volume_rows
from volumenes.settings import Settings
from volumenes.structure_file import (
    BUILTIN_TEXT,
    StructureDefinition,
    build_frame,
    builtin_structure,
    load_structure,
    to_text,
)
from volumenes.verification import VerificationCheck, VerifyOptions, all_ok, run_checks
from volumenes.volume import QuadratureSpec, fit_expansion, try_integrate_ball

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

COMMANDS = ("invariants", "ball-volume", "fit", "verify", "trace", "history")


def fmt(value: Any) -> str:
    """12 cifras significativas para números; el resto tal cual."""
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, (int, float)):
        return f"{float(value):.12g}"
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, (int, float)):
        v = float(value)
        return float(f"{v:.12g}") if math.isfinite(v) else None
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    return str(value)


@dataclass(frozen=True)
class RunConfig:
    command: str
    defn: StructureDefinition | None = None
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    eps: tuple[float, ...] = ()
    out: Path | None = None
    tol: float = 1e-10
    fd_step: float = 1e-4
    seed: int = 0
    fmt: str = "csv"
    store: bool = True
    full: bool = False
    workers: int = 1
    batch_size: int = 20000
    covector: tuple[float, float, float] = (1.0, 0.0, math.pi)
    t_final: float = 1.0
    limit: int = 20
    check_tol: float | None = None

    def params(self) -> dict[str, Any]:
        return {
            "quad": [self.quad.n_rho, self.quad.n_theta, self.quad.n_w],
            "eps": list(self.eps),
            "tol": self.tol,
            "fd_step": self.fd_step,
            "seed": self.seed,
            "check_tol": self.check_tol,
        }


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.replace(";", ",").split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"Lista de números inválida: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="volumenes", description="Volúmenes de bolas sub-riemannianas de contacto 3D")
    p.add_argument("command", choices=COMMANDS)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", help="Archivo TOML con la definición de la estructura")
    src.add_argument("--family", help=f"Familia incorporada ({', '.join(BUILTIN_TEXT)})")
    p.add_argument("--eps", help="Lista de ε separada por comas")
    p.add_argument("--quad", help="Nodos de cuadratura R,T,W")
    p.add_argument("--tol", type=float, help="Tolerancia del integrador ODE")
    p.add_argument(
        "--check-tol",
        type=float,
        help="ball-volume: repite con el doble de nodos y falla si el cambio relativo supera 10×check-tol",
    )
    p.add_argument("--seed", type=int, default=0, help="Semilla de las pruebas aleatorias")
    p.add_argument("--out", help="Archivo de salida (por defecto stdout)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    p.add_argument("--verbose", action="store_true", help="Logs en nivel DEBUG")
    p.add_argument("--no-store", action="store_true", help="No guardar la corrida en la base de datos")
    p.add_argument("--full", action="store_true", help="verify: incluye las comprobaciones lentas")
    p.add_argument("--workers", type=int, help="Hilos para los lotes de geodésicas")
    p.add_argument("--covector", help="trace: RHO,THETA,W")
    p.add_argument("--t-final", type=float, default=1.0, help="trace: tiempo final")
    p.add_argument("--limit", type=int, default=20, help="history: número de corridas")
    return p


def config_from_args(args: argparse.Namespace, settings: Settings) -> RunConfig:
    if args.config:
        defn = load_structure(args.config)
    elif args.family:
        defn = builtin_structure(args.family)
    else:
        defn = builtin_structure("heisenberg")

    if args.quad:
        quad = QuadratureSpec.parse(args.quad, args.tol or settings.ODE_TOL)
    else:
        r, t, w = settings.QUAD_NODES
        quad = QuadratureSpec(r, t, w, args.tol or settings.ODE_TOL)

    if args.eps:
        eps = _float_list(args.eps)
    elif args.command == "ball-volume":
        eps = (0.1,)
    else:
        eps = settings.EPS_LADDER
    if any(e <= 0 or e > 0.3 for e in eps):
        raise ConfigError(f"--eps: valores fuera de (0, 0.3]: {eps}")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError(f"--eps: la escalera debe ser estrictamente decreciente: {eps}")

    tol = args.tol or settings.ODE_TOL
    if not (1e-13 <= tol <= 1e-6):
        raise ConfigError(f"--tol fuera de [1e-13, 1e-6]: {tol}")
    check_tol = args.check_tol if args.check_tol is not None else settings.QUAD_CHECK_TOL
    if check_tol is not None and check_tol <= 0:
        raise ConfigError(f"--check-tol debe ser positivo: {check_tol}")
    if args.t_final <= 0:
        raise ConfigError(f"--t-final debe ser positivo: {args.t_final}")

    covector = (1.0, 0.0, math.pi)
    if args.covector:
        values = _float_list(args.covector)
        if len(values) != 3:
            raise ConfigError(f"--covector espera RHO,THETA,W: {args.covector!r}")
        covector = values  # type: ignore[assignment]

    return RunConfig(
        command=args.command,
        defn=defn,
        quad=quad,
        eps=eps,
        out=Path(args.out) if args.out else None,
        tol=tol,
        fd_step=settings.FD_STEP,
        seed=args.seed,
        fmt=args.fmt,
        store=settings.STORE_RUNS and not args.no_store,
        full=args.full,
        workers=args.workers or settings.WORKERS,
        batch_size=settings.BATCH_SIZE,
        covector=covector,
        t_final=args.t_final,
        limit=args.limit,
        check_tol=check_tol,
    )


# --- salida -------------------------------------------------------------------


def render_table(rows: Sequence[dict[str, Any]], columns: Sequence[str], fmt_name: str, extra: dict | None = None) -> str:
    if fmt_name == "json":
        payload: dict[str, Any] = {"rows": [{c: r.get(c) for c in columns} for r in rows]}
        if extra:
            payload.update(extra)
        return json.dumps(_json_value(payload), ensure_ascii=False, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    logger.info(f"Salida escrita en {out}")


# --- comandos -----------------------------------------------------------------


def _structure(config: RunConfig) -> ContactStructure:
    return derive(build_frame(config.defn))


def cmd_invariants(config: RunConfig) -> tuple[str, int]:
    s = _structure(config)
    kappa = kappa_at(s, ORIGIN)
    chi = chi_at(s, ORIGIN)
    rows = [
        {"quantity": "kappa", "value": kappa},
        {"quantity": "kappa_vol", "value": kappa / 3.0},
        {"quantity": "chi", "value": chi},
        {"quantity": "popp_density", "value": popp_density(s, ORIGIN)},
        {"quantity": "sec_identity_residual", "value": verify_sec_identity(s, ORIGIN)},
    ]
    return render_table(rows, ("quantity", "value"), config.fmt, {"structure": s.name}), EXIT_OK


def cmd_ball_volume(config: RunConfig, service: RunService | None = None) -> tuple[str, int]:
    s = _structure(config)
    kappa_vol = kappa_at(s, ORIGIN) / 3.0
    results = [
        try_integrate_ball(
            s,
            e,
            config.quad,
            fd_step=config.fd_step,
            check_tol=config.check_tol,
            batch_size=config.batch_size,
            workers=config.workers,
        )
        for e in config.eps
    ]
    ok_results = [r for r in results if r.ok]
    computed = iter(volume_rows([r.eps for r in ok_results], [r.volume for r in ok_results], kappa_vol))
    rows = []
    for r in results:
        row: dict[str, Any] = {"eps": r.eps, "error": r.error or ""}
        if r.ok:
            row.update(next(computed))
            row["negative_nodes"] = r.negative_nodes
        rows.append(row)
    if service is not None:
        service.record_ball_volume(
            results,
            family=config.defn.name,
            structure_text=to_text(config.defn),
            params=config.params(),
            kappa=kappa_at(s, ORIGIN),
            chi=chi_at(s, ORIGIN),
            kappa_vol=kappa_vol,
        )
    columns = ("eps", "volume", "volume_over_eps4", "predicted", "rel_deviation", "negative_nodes", "error")
    code = EXIT_OK if all(r.ok for r in results) else EXIT_FAILED
    return render_table(rows, columns, config.fmt), code


def cmd_fit(config: RunConfig, service: RunService | None = None) -> tuple[str, int]:
    s = _structure(config)
    report = fit_expansion(
        s, config.eps, config.quad, fd_step=config.fd_step, batch_size=config.batch_size, workers=config.workers
    )
    if service is not None:
        service.record_fit(report, family=config.defn.name, structure_text=to_text(config.defn), params=config.params())
    summary = {
        "c0_est": report.c0_est,
        "slope_est": report.slope_est,
        "c0_theory": report.c0_theory,
        "slope_theory": report.slope_theory,
        "kappa": report.kappa,
        "kappa_vol": report.kappa_vol,
        "chi": report.chi,
        "monotone": report.monotone,
    }
    rows = [
        {"eps": e, "volume": v, "volume_over_eps4": r, "residual": res}
        for e, v, r, res in zip(report.eps_list, report.volumes, report.ratios, report.residuals)
    ]
    columns = ("eps", "volume", "volume_over_eps4", "residual")
    if config.fmt == "json":
        return render_table(rows, columns, "json", summary), EXIT_OK
    text = render_table(rows, columns, "csv") + "\n" + render_table(
        [{"quantity": k, "value": v} for k, v in summary.items()], ("quantity", "value"), "csv"
    )
    return text, EXIT_OK


def _normal_form(defn: StructureDefinition) -> NormalFormSpec | None:
    if defn.family != "normal_form":
        return None
    return NormalFormSpec.parse(defn.beta, defn.gamma)


def cmd_verify(config: RunConfig, service: RunService | None = None) -> tuple[str, int]:
    s = _structure(config)
    opts = VerifyOptions(
        seed=config.seed,
        ode_tol=config.tol,
        fd_step=config.fd_step,
        quad=config.quad,
        eps_ladder=config.eps,
        batch_size=config.batch_size,
        workers=config.workers,
    )
    checks: list[VerificationCheck] = run_checks(s, opts, normal_form=_normal_form(config.defn), full=config.full)
    if service is not None:
        service.record_verification(checks, family=config.defn.name, params=config.params())
    rows = [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in checks]
    code = EXIT_OK if all_ok(checks) else EXIT_FAILED
    return render_table(rows, ("name", "ok", "detail"), config.fmt, {"ok": code == EXIT_OK}), code


def cmd_trace(config: RunConfig) -> tuple[str, int]:
    s = _structure(config)
    rho, theta, w = config.covector
    try:
        cov = CylCovector(rho, theta, w)
    except ValueError as e:
        raise ConfigError(f"--covector: {e}") from e
    trace = integrate(s, cov, config.t_final, config.tol)
    buf = io.StringIO()
    trace_to_csv(trace, stream=buf)
    return buf.getvalue(), EXIT_OK


def cmd_history(summaries: Sequence[RunSummary], config: RunConfig) -> tuple[str, int]:
    columns = ("id", "command", "family", "ok", "kappa", "chi", "c0_est", "slope_est", "n_volumes", "n_checks", "n_failed")
    rows = [{c: getattr(r, c) for c in columns} for r in summaries]
    return render_table(rows, columns, config.fmt), EXIT_OK


def _dispatch(config: RunConfig, service: RunService | None) -> tuple[str, int]:
    if config.command == "invariants":
        return cmd_invariants(config)
    if config.command == "ball-volume":
        return cmd_ball_volume(config, service)
    if config.command == "fit":
        return cmd_fit(config, service)
    if config.command == "verify":
        return cmd_verify(config, service)
    return cmd_trace(config)


def run(config: RunConfig, settings: Settings) -> tuple[str, int]:
    needs_store = config.command == "history" or (
        config.store and config.command in ("ball-volume", "fit", "verify")
    )
    if not needs_store:
        return _dispatch(config, None)

    settings.ensure_instance()
    with run_store(settings.DATABASE_URL) as session:
        service = RunService(session)
        if config.command == "history":
            return cmd_history(service.history(config.limit), config)
        return _dispatch(config, service)


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Sequence[str] | None = None, settings: Settings | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = settings or Settings()
    except ValueError as e:
        print(f"Configuración inválida: {e}", file=sys.stderr)
        return EXIT_INPUT
    configure_logging("DEBUG" if args.verbose else settings.LOG_LEVEL)

    try:
        config = config_from_args(args, settings)
        text, code = run(config, settings)
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_INPUT
    except SQLAlchemyError as e:
        logger.error(f"Error de la base de datos de corridas: {e}")
        return EXIT_FAILED
    except VolumenesError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_FAILED

    emit(text, config.out)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
