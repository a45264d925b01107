from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in str(text).replace(";", ",").split(",") if p.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in str(text).split(",") if p.strip())


def _absolute_sqlite_url(url: str) -> str:
    """sqlite:///relativa.sqlite -> ruta absoluta respecto de la raíz del proyecto."""
    prefix = "sqlite:///"
    if not url.startswith(prefix) or url.startswith(prefix + "/"):
        return url
    path_part = url[len(prefix) :].split("?", 1)[0]
    if path_part == ":memory:" or Path(path_part).is_absolute():
        return url
    project_root = Path(__file__).resolve().parents[1]
    return f"{prefix}{(project_root / path_part).resolve().as_posix()}"


@dataclass(frozen=True)
class Settings:
    # App
    APP_NAME: str = os.environ.get("APP_NAME", "Volumenes SR")
    LOG_LEVEL: str = os.environ.get("LOG_LEVEL", "INFO")

    # Storage (run history)
    INSTANCE_DIR: Path = Path(os.environ.get("INSTANCE_DIR", "instance")).resolve()
    DATABASE_URL: str = os.environ.get(
        "DATABASE_URL", f"sqlite:///{(Path('instance') / 'runs.sqlite').as_posix()}"
    )
    STORE_RUNS: bool = os.environ.get("STORE_RUNS", "true").lower() == "true"

    # Numerics
    ODE_TOL: float = float(os.environ.get("ODE_TOL", "1e-10"))
    FD_STEP: float = float(os.environ.get("FD_STEP", "1e-4"))
    QUAD_NODES: tuple[int, ...] = _ints(os.environ.get("QUAD_NODES", "16,32,48"))
    EPS_LADDER: tuple[float, ...] = _floats(os.environ.get("EPS_LADDER", "0.20,0.15,0.10,0.07,0.05"))
    # Vacío: sin repetición con el doble de nodos en ball-volume
    QUAD_CHECK_TOL: float | None = float(os.environ["QUAD_CHECK_TOL"]) if os.environ.get("QUAD_CHECK_TOL") else None

    # Batching of vectorised ODE solves
    BATCH_SIZE: int = int(os.environ.get("BATCH_SIZE", "20000"))
    WORKERS: int = int(os.environ.get("WORKERS", "1"))

    def __post_init__(self) -> None:
        object.__setattr__(self, "INSTANCE_DIR", Path(self.INSTANCE_DIR).resolve())
        object.__setattr__(self, "LOG_LEVEL", str(self.LOG_LEVEL or "INFO").upper())

        if len(self.QUAD_NODES) != 3:
            raise ValueError(f"QUAD_NODES debe tener 3 enteros R,T,W: {self.QUAD_NODES}")
        object.__setattr__(self, "BATCH_SIZE", max(1, int(self.BATCH_SIZE)))
        object.__setattr__(self, "WORKERS", max(1, int(self.WORKERS)))

        # Without an explicit DATABASE_URL the store always lives inside INSTANCE_DIR.
        url = str(self.DATABASE_URL or "").strip() if "DATABASE_URL" in os.environ else ""
        if not url:
            url = f"sqlite:///{(self.INSTANCE_DIR / 'runs.sqlite').resolve().as_posix()}"
        object.__setattr__(self, "DATABASE_URL", _absolute_sqlite_url(url))

    def ensure_instance(self) -> None:
        self.INSTANCE_DIR.mkdir(parents=True, exist_ok=True)
