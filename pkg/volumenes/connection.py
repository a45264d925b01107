"""Conexión de Levi-Civita de la métrica extendida (X0, X1, X2 ortonormales).

Γ_ij^k = g(∇_{X_i} X_j, X_k) = −½(c_ij^k − c_jk^i + c_ki^j), evaluado punto a punto.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from volumenes.contact import BRACKET_PAIRS, ContactStructure, chi_at, kappa_at

logger = logging.getLogger(__name__)

ANTISYM_TOL = 1e-12
SEC_CONSTANT = -0.75


@dataclass(frozen=True, eq=False)
class ExtendedConstants:
    """Tabla c[i, j, k] = c_ij^k de {X0, X1, X2}, antisimétrica en (i, j)."""

    table: np.ndarray

    def __post_init__(self) -> None:
        table = np.asarray(self.table, dtype=float)
        if table.shape != (3, 3, 3):
            raise ValueError(f"Se esperaba una tabla 3×3×3, no {table.shape}")
        skew = float(np.max(np.abs(table + table.transpose(1, 0, 2))))
        if skew > ANTISYM_TOL:
            raise ValueError(f"c_ij^k no es antisimétrica en (i, j): {skew:.3e}")
        object.__setattr__(self, "table", table)

    def __getitem__(self, key: tuple[int, int, int]) -> float:
        return float(self.table[key])

    @classmethod
    def zeros(cls) -> ExtendedConstants:
        return cls(np.zeros((3, 3, 3)))

    @classmethod
    def heisenberg(cls) -> ExtendedConstants:
        table = np.zeros((3, 3, 3))
        table[1, 2, 0] = 1.0
        table[2, 1, 0] = -1.0
        return cls(table)


def christoffel(ext: ExtendedConstants) -> np.ndarray:
    c = ext.table
    # c_jk^i -> índice [i, j, k] es c[j, k, i]; c_ki^j -> c[k, i, j]
    return -0.5 * (c - np.einsum("jki->ijk", c) + np.einsum("kij->ijk", c))


def extended_constants(structure: ContactStructure, pt: Sequence[float]) -> ExtendedConstants:
    return ExtendedConstants(structure.constants_at(pt))


def constant_derivatives(structure: ContactStructure, pt: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Tablas X1(c_ij^k) y X2(c_ij^k) en pt, con derivadas exactas."""
    out = (np.zeros((3, 3, 3)), np.zeros((3, 3, 3)))
    for d, table in zip((1, 2), out):
        for i, j in BRACKET_PAIRS:
            for k in range(3):
                value = structure.derivative_fn(d, i, j, k).at(pt)
                table[i, j, k] = value
                table[j, i, k] = -value
    return out


def levi_civita_sectional(ext: ExtendedConstants, derivs: tuple[np.ndarray, np.ndarray]) -> float:
    """Sec(X1, X2) = g(R(X1, X2)X2, X1) a partir de los símbolos de Christoffel.

    ``derivs`` son las tablas X1(c) y X2(c); Γ es lineal en c, así que
    X_d(Γ) = christoffel(X_d(c)).
    """
    gamma = christoffel(ext)
    d1_gamma = christoffel(ExtendedConstants(derivs[0]))
    d2_gamma = christoffel(ExtendedConstants(derivs[1]))
    c = ext.table
    value = d1_gamma[2, 2, 1] - d2_gamma[1, 2, 1]
    for k in range(3):
        value += gamma[2, 2, k] * gamma[1, k, 1]
        value -= gamma[1, 2, k] * gamma[2, k, 1]
        value += c[1, 2, k] * gamma[k, 2, 1]
    return float(value)


def sectional_D(structure: ContactStructure, pt: Sequence[float]) -> float:
    """Curvatura seccional del plano de la distribución, fórmula explícita."""
    c = structure.c
    at = tuple(float(v) for v in pt)
    c121, c122 = c(1, 2, 1).at(at), c(1, 2, 2).at(at)
    c011, c012, c021 = c(0, 1, 1).at(at), c(0, 1, 2).at(at), c(0, 2, 1).at(at)
    return (
        -structure.derivative_fn(1, 1, 2, 2).at(at)
        + structure.derivative_fn(2, 1, 2, 1).at(at)
        - c121 * c121
        - c122 * c122
        + (c012 - c021) / 2.0
        + c011 * c011
        + (c021 + c012) ** 2 / 4.0
        + SEC_CONSTANT
    )


def verify_sec_identity(structure: ContactStructure, pt: Sequence[float]) -> float:
    """|Sec(D) − (κ + χ² − 3/4)|."""
    chi = chi_at(structure, pt)
    residual = abs(sectional_D(structure, pt) - (kappa_at(structure, pt) + chi * chi + SEC_CONSTANT))
    logger.debug(f"Identidad de Sec en {tuple(pt)}: residuo {residual:.3e}")
    return residual


def verify_levi_civita(structure: ContactStructure, pt: Sequence[float]) -> float:
    """|Sec por Christoffel − Sec explícita|: dos rutas independientes."""
    ext = extended_constants(structure, pt)
    lc = levi_civita_sectional(ext, constant_derivatives(structure, pt))
    return abs(lc - sectional_D(structure, pt))


def connection_residuals(ext: ExtendedConstants) -> tuple[float, float]:
    """Torsión nula y compatibilidad métrica de Γ: (máx |Γ_ij^k − Γ_ji^k + c_ij^k|, máx |Γ_ij^k + Γ_ik^j|)."""
    gamma = christoffel(ext)
    torsion = gamma - gamma.transpose(1, 0, 2) + ext.table
    metric = gamma + gamma.transpose(0, 2, 1)
    return float(np.max(np.abs(torsion))), float(np.max(np.abs(metric)))
