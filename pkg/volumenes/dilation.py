from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from volumenes.contact import ContactStructure, FrameField, derive
from volumenes.geodesic import CylCovector
from volumenes.polyexpr import RationalField3

# Pesos d1 = d2 = 1, d0 = 2 de los índices del marco {X0, X1, X2}.
WEIGHTS = (2, 1, 1)


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if eps <= 0:
        raise ValueError(f"epsilon debe ser positivo: {eps}")
    return eps


def dilate_point(eps: float, pt: Sequence[float]):
    eps = _check_eps(eps)
    x, y, z = pt
    return (eps * x, eps * y, eps * eps * z)


def contract_point(eps: float, pt: Sequence[float]):
    return dilate_point(1.0 / _check_eps(eps), pt)


def _dilate_field(eps: float, field: RationalField3) -> RationalField3:
    # X^ε(q) = ε · diag(1/ε, 1/ε, 1/ε²) · X(δ_ε q)
    moved = [c.scale_vars(eps, eps, eps * eps) for c in field.components]
    return RationalField3([moved[0], moved[1], moved[2] * (1.0 / eps)])


def dilate_frame(eps: float, frame: FrameField) -> FrameField:
    eps = _check_eps(eps)
    if eps == 1.0:
        return frame
    return FrameField(_dilate_field(eps, frame.X1), _dilate_field(eps, frame.X2), name=frame.name)


def tau(eps: float, cov: CylCovector) -> CylCovector:
    return CylCovector(cov.rho * _check_eps(eps), cov.theta, cov.w)


def homogeneity_weight(i: int, j: int, k: int) -> int:
    return WEIGHTS[i] + WEIGHTS[j] - WEIGHTS[k]


@dataclass(frozen=True, eq=False)
class DilatedStructure:
    """Estructura ε-dilatada junto a su estructura madre."""

    epsilon: float
    parent: ContactStructure

    def __post_init__(self) -> None:
        _check_eps(self.epsilon)

    @cached_property
    def frame(self) -> FrameField:
        return dilate_frame(self.epsilon, self.parent.frame)

    @cached_property
    def structure(self) -> ContactStructure:
        if self.epsilon == 1.0:
            return self.parent
        return derive(self.frame)

    def predicted_constant(self, i: int, j: int, k: int, q: Sequence[float]) -> float:
        """ε^{d_i+d_j−d_k} c_ij^k(δ_ε q) a partir de la estructura madre."""
        p = dilate_point(self.epsilon, q)
        return self.epsilon ** homogeneity_weight(i, j, k) * self.parent.c(i, j, k).at(p)
