"""Fórmulas cerradas del grupo de Heisenberg.

Todas las funciones aceptan escalares o arrays de numpy. Cerca de w = 0 se usa
la serie de Taylor (coeficientes exactos con ``fractions``) para evitar la
cancelación de las fórmulas cerradas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate, special

SERIES_W = 0.5
SERIES_WT = 1e-2
QUAD_TOL = 1e-13

TWO_PI = 2.0 * math.pi

# (coeficiente, potencia de w, "cos" | "sin" | "one", frecuencia)
_Term = tuple[Fraction, int, str, Fraction]


def _trig_series(kind: str, k: Fraction, degree: int) -> list[Fraction]:
    out = [Fraction(0)] * (degree + 1)
    if kind == "one":
        out[0] = Fraction(1)
        return out
    for p in range(degree + 1):
        if (kind == "cos" and p % 2 == 0) or (kind == "sin" and p % 2 == 1):
            out[p] = Fraction((-1) ** (p // 2)) * k**p / math.factorial(p)
    return out


def quotient_series(numerator: list[_Term], shift: int, order: int) -> np.ndarray:
    """Coeficientes ascendentes de Σ c·w^j·trig(k·w) / w^shift hasta w^order."""
    degree = shift + order
    total = [Fraction(0)] * (degree + 1)
    for coef, j, kind, k in numerator:
        for p, c in enumerate(_trig_series(kind, Fraction(k), degree)):
            if c and p + j <= degree:
                total[p + j] += Fraction(coef) * c
    if any(total[:shift]):
        raise ArithmeticError("El numerador no se anula al orden requerido")
    return np.array([float(c) for c in total[shift:]])


def _polyval(coeffs: np.ndarray, w):
    return np.polynomial.polynomial.polyval(w, coeffs)


_F = Fraction
# (2 − 2cos w − w sin w) / w⁴
_JAC_SERIES = quotient_series(
    [(_F(2), 0, "one", _F(0)), (_F(-2), 0, "cos", _F(1)), (_F(-1), 1, "sin", _F(1))], 4, 16
)
# ((16 − 3w²)cos w + 2cos 2w + 13w sin w + w sin 2w − 18) / w⁶
_G0_SERIES = quotient_series(
    [
        (_F(16), 0, "cos", _F(1)),
        (_F(-3), 2, "cos", _F(1)),
        (_F(2), 0, "cos", _F(2)),
        (_F(13), 1, "sin", _F(1)),
        (_F(1), 1, "sin", _F(2)),
        (_F(-18), 0, "one", _F(0)),
    ],
    6,
    16,
)
# (5w sin w − (w² − 8)cos w − 8) / w⁶
_U2_SERIES = quotient_series(
    [
        (_F(5), 1, "sin", _F(1)),
        (_F(-1), 2, "cos", _F(1)),
        (_F(8), 0, "cos", _F(1)),
        (_F(-8), 0, "one", _F(0)),
    ],
    6,
    16,
)
# (4cos w − 3 − cos 2w + w sin w − (w/2) sin 2w) / w⁶ = 2 sin²(w/2)(2cos w + w sin w − 2)/w⁶
_SPLIT_SERIES = quotient_series(
    [
        (_F(4), 0, "cos", _F(1)),
        (_F(-3), 0, "one", _F(0)),
        (_F(-1), 0, "cos", _F(2)),
        (_F(1), 1, "sin", _F(1)),
        (_F(-1, 2), 1, "sin", _F(2)),
    ],
    6,
    16,
)
# (cos s − 1)/s, sin s / s, (s − sin s)/s²
_COSM1_SERIES = quotient_series([(_F(1), 0, "cos", _F(1)), (_F(-1), 0, "one", _F(0))], 1, 9)
_SINC_SERIES = quotient_series([(_F(1), 0, "sin", _F(1))], 1, 9)
_SMS_SERIES = quotient_series([(_F(1), 1, "one", _F(0)), (_F(-1), 0, "sin", _F(1))], 2, 9)


def _branch(w, threshold: float, closed, series):
    """closed(w) lejos de 0, series(w) cerca; conserva escalares."""
    arr = np.asarray(w, dtype=float)
    small = np.abs(arr) < threshold
    safe = np.where(small, 1.0, arr)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(small, series(arr), closed(safe))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class HeisExpResult:
    x: float
    y: float
    z: float
    valid_series: bool


def heis_state(rho, theta, w, t=1.0):
    """(x, y, z, θ, w) en tiempo t de la geodésica con covector (ρ, θ, w)."""
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    w = np.asarray(w, dtype=float)
    t = np.asarray(t, dtype=float)
    s = w * t
    cosm1_s = _branch(s, SERIES_WT, lambda v: (np.cos(v) - 1.0) / v, lambda v: _polyval(_COSM1_SERIES, v))
    sinc_s = _branch(s, SERIES_WT, lambda v: np.sin(v) / v, lambda v: _polyval(_SINC_SERIES, v))
    sms_s = _branch(s, SERIES_WT, lambda v: (v - np.sin(v)) / (v * v), lambda v: _polyval(_SMS_SERIES, v))
    ct, st = np.cos(theta), np.sin(theta)
    x = rho * t * (st * cosm1_s + ct * sinc_s)
    y = -rho * t * (ct * cosm1_s - st * sinc_s)
    z = rho * rho * t * t * sms_s / 2.0
    return x, y, z, theta + s, w + 0.0 * s


def heis_exp(rho: float, theta: float, w: float, t: float = 1.0) -> HeisExpResult:
    x, y, z, _, _ = heis_state(rho, theta, w, t)
    return HeisExpResult(float(x), float(y), float(z), valid_series=abs(w * t) < SERIES_WT)


def _jac_w(w):
    return _branch(
        w,
        SERIES_W,
        lambda v: (2.0 - 2.0 * np.cos(v) - v * np.sin(v)) / v**4,
        lambda v: _polyval(_JAC_SERIES, v),
    )


def heis_jacobian(rho, theta, w):
    """det J exp en (ρ, θ, w); θ no interviene."""
    return np.asarray(rho, dtype=float) ** 3 * _jac_w(w) + 0.0 * np.asarray(theta, dtype=float)


def g0(w):
    return _branch(
        w,
        SERIES_W,
        lambda v: (
            (16.0 - 3.0 * v * v) * np.cos(v)
            + 2.0 * np.cos(2.0 * v)
            + 13.0 * v * np.sin(v)
            + v * np.sin(2.0 * v)
            - 18.0
        )
        / v**6,
        lambda v: _polyval(_G0_SERIES, v),
    )


def u2_integrand(w):
    """(π/2)(5w sin w − (w² − 8)cos w − 8)/w⁶."""
    return (math.pi / 2.0) * np.asarray(
        _branch(
            w,
            SERIES_W,
            lambda v: (5.0 * v * np.sin(v) - (v * v - 8.0) * np.cos(v) - 8.0) / v**6,
            lambda v: _polyval(_U2_SERIES, v),
        )
    )


def u2_split_integrand(w):
    """(2π/3) sin²(w/2)(2cos w + w sin w − 2)/w⁶ + (π/6) g0(w); igual a u2_integrand."""
    first = _branch(
        w,
        SERIES_W,
        lambda v: (4.0 * np.cos(v) - 3.0 - np.cos(2.0 * v) + v * np.sin(v) - 0.5 * v * np.sin(2.0 * v)) / v**6,
        lambda v: _polyval(_SPLIT_SERIES, v),
    )
    return (math.pi / 3.0) * np.asarray(first) + (math.pi / 6.0) * np.asarray(g0(w))


def sine_integral(x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise ValueError("sine_integral solo está definido aquí para x >= 0")
    si, _ = special.sici(arr)
    return float(si) if np.ndim(si) == 0 else si


@lru_cache(maxsize=None)
def c0() -> float:
    return (1.0 + TWO_PI * sine_integral(TWO_PI)) / 12.0


@lru_cache(maxsize=None)
def c1() -> float:
    return (2.0 + 4.0 * math.pi * sine_integral(TWO_PI) - 1.0 / math.pi**2) / (160.0 * c0())


def c1_rhs() -> float:
    """(1/160)(1/π² − 2 − 4π Si(2π)) = −c0·c1."""
    return (1.0 / math.pi**2 - 2.0 - 4.0 * math.pi * sine_integral(TWO_PI)) / 160.0


def heis_cut_time(w: float) -> float:
    if w == 0:
        return math.inf
    return TWO_PI / abs(w)


def unit_ball_volume() -> float:
    """∫_Ω ρ³ J(w): la integral en ρ y θ es exacta (2π/4)."""
    value, _ = integrate.quad(
        lambda v: float(_jac_w(v)), -TWO_PI, TWO_PI, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200
    )
    return (math.pi / 2.0) * value
