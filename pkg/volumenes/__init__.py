from .settings import Settings
from .db import init_db
from .contact import derive, heisenberg_frame, build_normal_frame, NormalFormSpec
from .volume import QuadratureSpec, ball_volume, fit_expansion

__all__ = [
    "Settings",
    "init_db",
    "derive",
    "heisenberg_frame",
    "build_normal_frame",
    "NormalFormSpec",
    "QuadratureSpec",
    "ball_volume",
    "fit_expansion",
]
