from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from volumenes.errors import DomainError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
ASYMPTOTIC_W = 4.0 * math.pi
SMALL_RHO = 0.5


@dataclass(frozen=True)
class CutTime:
    value: float
    in_regime: bool


def f_theta(kappa: float, chi: float, theta):
    return (kappa + 2.0 * chi * np.sin(theta) ** 2) / (4.0 * math.pi)


def cut_time_asymptotic(
    kappa: float, chi: float, theta: float, w: float, guard: float = ASYMPTOTIC_W
) -> CutTime:
    """2π/|w| − π(κ + 2χ sin²θ)/|w|³; marca fuera de régimen si |w| < guard."""
    aw = abs(float(w))
    if aw == 0:
        raise ValueError("cut_time_asymptotic requiere w != 0")
    in_regime = aw >= guard
    if not in_regime:
        logger.warning(f"|w|={aw:.4g} por debajo del régimen asintótico ({guard:.4g})")
    value = TWO_PI / aw - math.pi * (kappa + 2.0 * chi * math.sin(theta) ** 2) / aw**3
    return CutTime(value=value, in_regime=in_regime)


def inverse_cut(kappa: float, chi: float, theta: float, rho: float, rho_max: float = SMALL_RHO) -> float:
    """|w| cuyo tiempo de corte es ρ: 2π/ρ − (κ + 2χ sin²θ)ρ/(4π)."""
    if rho <= 0:
        raise ValueError(f"rho debe ser positivo: {rho}")
    if rho > rho_max:
        logger.warning(f"rho={rho:.4g} fuera del rango asintótico (<= {rho_max})")
    return TWO_PI / rho - rho * float(f_theta(kappa, chi, theta))


@dataclass(frozen=True)
class OmegaDomain:
    """Dominio Ω^ε(1) en coordenadas cilíndricas dilatadas."""

    eps: float
    kappa: float
    chi: float
    rho_max: float = 1.0

    def w_bound(self, rho, theta):
        bound = TWO_PI - self.eps**2 * np.asarray(rho) ** 2 * f_theta(self.kappa, self.chi, theta)
        if np.any(bound <= 0):
            raise DomainError(f"Cota de w no positiva con eps={self.eps}: dominio asintótico inválido")
        return float(bound) if np.ndim(bound) == 0 else bound

    def contains(self, rho, theta, w):
        rho = np.asarray(rho)
        return (rho >= 0) & (rho <= self.rho_max) & (np.abs(w) <= self.w_bound(rho, theta))

    def w_nodes(self, rho, theta, nodes: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Lleva nodos de Gauss en [−1, 1] a [−B, B] con B = w_bound(ρ, θ).

        Devuelve arrays de forma (..., len(nodes)).
        """
        bound = np.asarray(self.w_bound(rho, theta))[..., None]
        return bound * nodes, bound * weights


def w_bound(domain: OmegaDomain, rho, theta):
    return domain.w_bound(rho, theta)
