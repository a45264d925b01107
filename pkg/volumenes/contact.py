from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from volumenes.errors import BoundaryConditionError, DegenerateFrameError
from volumenes.polyexpr import (
    VARS,
    X,
    Y,
    Polynomial,
    RationalBundle,
    RationalField3,
    RationalFn,
    lie_bracket,
    parse_poly,
)

logger = logging.getLogger(__name__)

DET_TOL = 1e-10
ORIGIN = (0.0, 0.0, 0.0)

# Índices del marco {X0, X1, X2}; los pares (i, j) con corchete no trivial.
BRACKET_PAIRS = ((1, 2), (0, 1), (0, 2))


def _cross(u: Sequence[RationalFn], v: Sequence[RationalFn]) -> tuple[RationalFn, RationalFn, RationalFn]:
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def _dot(u: Sequence[RationalFn], v: Sequence[RationalFn]) -> RationalFn:
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _det3(a: RationalField3, b: RationalField3, c: RationalField3) -> RationalFn:
    return _dot(tuple(a), _cross(tuple(b), tuple(c)))


@dataclass(frozen=True)
class FrameField:
    """Par ortonormal (X1, X2); la condición de contacto se valida en el origen."""

    X1: RationalField3
    X2: RationalField3
    name: str = ""

    def __post_init__(self) -> None:
        det = self.matrix_det(ORIGIN)
        if abs(det) < DET_TOL:
            raise DegenerateFrameError(
                f"X1, X2, [X2,X1] no son independientes en el origen (det={det:.3e})"
            )

    @cached_property
    def X3(self) -> RationalField3:
        return lie_bracket(self.X2, self.X1)

    @cached_property
    def delta(self) -> RationalFn:
        """det(X1, X2, X3) como función racional."""
        return _det3(self.X1, self.X2, self.X3)

    def matrix_at(self, pt: Sequence[float]) -> np.ndarray:
        return np.vstack([self.X1.at(pt), self.X2.at(pt), self.X3.at(pt)])

    def matrix_det(self, pt: Sequence[float]) -> float:
        return float(np.linalg.det(self.matrix_at(pt)))


@dataclass(frozen=True)
class NormalFormSpec:
    beta: Polynomial
    gamma: Polynomial

    @classmethod
    def parse(cls, beta: str = "0", gamma: str = "0") -> NormalFormSpec:
        return cls(parse_poly(beta), parse_poly(gamma))

    def violations(self) -> list[str]:
        checks = (
            ("β(0,0,z) ≡ 0", self.beta),
            ("γ(0,0,z) ≡ 0", self.gamma),
            ("∂γ/∂x(0,0,z) ≡ 0", self.gamma.partial("x")),
            ("∂γ/∂y(0,0,z) ≡ 0", self.gamma.partial("y")),
        )
        out = []
        for identity, poly in checks:
            rest = poly.restrict_z_axis()
            if not rest.is_zero():
                out.append(f"{identity} (se obtuvo {rest})")
        return out


@dataclass(frozen=True)
class NormalFormInvariants:
    kappa: float
    chi: float
    kappa_vol: float


@dataclass(frozen=True, eq=False)
class ContactStructure:
    """Forma de contacto, campo de Reeb y constantes de estructura de un marco.

    ``constants[(i, j, k)]`` es c_ij^k con [X_j, X_i] = Σ_k c_ij^k X_k.
    """

    frame: FrameField
    omega: tuple[RationalFn, RationalFn, RationalFn]
    domega: tuple[tuple[RationalFn, ...], ...]
    reeb: RationalField3
    constants: dict[tuple[int, int, int], RationalFn]

    @property
    def X1(self) -> RationalField3:
        return self.frame.X1

    @property
    def X2(self) -> RationalField3:
        return self.frame.X2

    @property
    def name(self) -> str:
        return self.frame.name

    def c(self, i: int, j: int, k: int) -> RationalFn:
        return self.constants[(i, j, k)]

    def constants_at(self, pt: Sequence[float]) -> np.ndarray:
        out = np.zeros((3, 3, 3))
        for (i, j, k), fn in self.constants.items():
            out[i, j, k] = fn.at(pt)
        return out

    @cached_property
    def _derivatives(self) -> dict[tuple[int, int, int, int], RationalFn]:
        return {}

    def derivative_fn(self, d: int, i: int, j: int, k: int) -> RationalFn:
        """X_d(c_ij^k) exacta, d ∈ {1, 2}; se calcula una sola vez."""
        key = (d, i, j, k)
        if key not in self._derivatives:
            if d not in (1, 2):
                raise ValueError(f"Dirección de derivada inválida: {d}")
            field = self.X1 if d == 1 else self.X2
            self._derivatives[key] = field.apply(self.c(i, j, k))
        return self._derivatives[key]

    @cached_property
    def kappa_fn(self) -> RationalFn:
        c = self.c
        return (
            self.X2.apply(c(1, 2, 1))
            - self.X1.apply(c(1, 2, 2))
            - c(1, 2, 1) * c(1, 2, 1)
            - c(1, 2, 2) * c(1, 2, 2)
            + (c(0, 1, 2) - c(0, 2, 1)) * 0.5
        )

    def quadratic_form(self, pt: Sequence[float]) -> np.ndarray:
        """Matriz de {H, h0} en (h1, h2); traza nula."""
        c11 = self.c(0, 1, 1).at(pt)
        off = 0.5 * (self.c(0, 1, 2).at(pt) + self.c(0, 2, 1).at(pt))
        c22 = self.c(0, 2, 2).at(pt)
        return np.array([[c11, off], [off, c22]])

    @cached_property
    def flow_bundle(self) -> RationalBundle:
        # X1 (3), X2 (3), coeficientes de a(θ) (3), de b(θ) (2)
        c = self.c
        return RationalBundle(
            [
                *self.X1.components,
                *self.X2.components,
                c(0, 1, 1),
                c(0, 1, 2) + c(0, 2, 1),
                c(0, 2, 2),
                c(1, 2, 1),
                c(1, 2, 2),
            ]
        )

    def flow_coefficients(self, x, y, z) -> np.ndarray:
        return self.flow_bundle.evaluate(x, y, z)

    @cached_property
    def _delta_bundle(self) -> RationalBundle:
        return RationalBundle([self.frame.delta])

    def popp_values(self, x, y, z) -> np.ndarray:
        det = self._delta_bundle.evaluate(x, y, z)[0]
        if np.any(np.abs(det) < DET_TOL):
            raise DegenerateFrameError("Marco degenerado: det(X1,X2,X3) se anula")
        return 1.0 / np.abs(det)


def heisenberg_frame() -> FrameField:
    return FrameField(
        RationalField3([1.0, 0.0, Y * -0.5]),
        RationalField3([0.0, 1.0, X * 0.5]),
        name="heisenberg",
    )


def build_normal_frame(spec: NormalFormSpec, name: str = "normal_form") -> FrameField:
    bad = spec.violations()
    if bad:
        raise BoundaryConditionError("; ".join(bad))
    b, g = spec.beta, spec.gamma
    X1 = RationalField3([1.0 + b * Y * Y, -(b * X * Y), Y * -0.5 - g * Y * 0.5])
    X2 = RationalField3([-(b * X * Y), 1.0 + b * X * X, X * 0.5 + g * X * 0.5])
    return FrameField(X1, X2, name=name)


def rotate_frame(frame: FrameField, phi: float) -> FrameField:
    cs, sn = math.cos(phi), math.sin(phi)
    X1 = frame.X1.scale(cs) + frame.X2.scale(sn)
    X2 = frame.X2.scale(cs) - frame.X1.scale(sn)
    return FrameField(X1, X2, name=frame.name)


def derive(frame: FrameField) -> ContactStructure:
    """ω, dω, X0 y c_ij^k exactos para el marco dado.

    ω = (X1 × X2)/Δ con Δ = det(X1, X2, X3). Como ω∧dω = Δ⁻¹ dx∧dy∧dz, el
    vector de Hodge v de dω cumple ω·v = 1/Δ y el campo de Reeb es Δ·v.
    Las constantes salen de la base dual {ω, ν1, ν2} de {X0, X1, X2}.
    """
    X1, X2, X3 = frame.X1, frame.X2, frame.X3
    delta = frame.delta
    inv_delta = delta.reciprocal()

    omega = tuple(comp * inv_delta for comp in _cross(tuple(X1), tuple(X2)))

    domega = [[RationalFn(0.0)] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(i + 1, 3):
            d = omega[j].partial(VARS[i]) - omega[i].partial(VARS[j])
            domega[i][j] = d
            domega[j][i] = -d
    hodge = (domega[1][2], domega[2][0], domega[0][1])
    reeb = RationalField3(delta * h for h in hodge)

    nu1 = tuple(comp * inv_delta for comp in _cross(tuple(X2), tuple(reeb)))
    nu2 = tuple(comp * inv_delta for comp in _cross(tuple(reeb), tuple(X1)))
    coframe = (omega, nu1, nu2)

    fields = {0: reeb, 1: X1, 2: X2}
    brackets = {
        (1, 2): X3,
        (0, 1): lie_bracket(X1, reeb),
        (0, 2): lie_bracket(X2, reeb),
    }
    zero = RationalFn(0.0)
    constants: dict[tuple[int, int, int], RationalFn] = {
        (i, i, k): zero for i in fields for k in range(3)
    }
    for (i, j), bracket in brackets.items():
        for k in range(3):
            value = _dot(coframe[k], tuple(bracket))
            constants[(i, j, k)] = value
            constants[(j, i, k)] = -value

    logger.debug(f"Estructura derivada para {frame.name or 'marco'}: Δ = {delta}")
    return ContactStructure(
        frame=frame,
        omega=omega,  # type: ignore[arg-type]
        domega=tuple(tuple(row) for row in domega),
        reeb=reeb,
        constants=constants,
    )


def kappa_at(s: ContactStructure, pt: Sequence[float]) -> float:
    return s.kappa_fn.at(pt)


def chi_at(s: ContactStructure, pt: Sequence[float]) -> float:
    """χ = sqrt((c01² + c02¹)²/4 + (c01¹)²).

    La fórmula impresa habitualmente lleva c02² en el término mixto; aquí se
    usa c02¹, la entrada fuera de la diagonal de {H, h0}, que coincide con
    sqrt(-det {H, h0}) y con la identidad de la curvatura seccional.
    """
    mixed = s.c(0, 1, 2).at(pt) + s.c(0, 2, 1).at(pt)
    c011 = s.c(0, 1, 1).at(pt)
    return math.sqrt(mixed * mixed / 4.0 + c011 * c011)


def popp_density(s: ContactStructure, pt: Sequence[float]) -> float:
    det = s.frame.matrix_det(pt)
    if abs(det) < DET_TOL:
        raise DegenerateFrameError(f"Marco degenerado en {tuple(pt)} (det={det:.3e})")
    return 1.0 / abs(det)


def gamma2(spec: NormalFormSpec) -> tuple[float, float, float]:
    terms = spec.gamma.terms
    return (
        terms.get((2, 0, 0), 0.0),
        terms.get((1, 1, 0), 0.0) / 2.0,
        terms.get((0, 2, 0), 0.0),
    )


def normal_form_invariants(a: float, b: float, c: float) -> NormalFormInvariants:
    """κ, χ en el origen para γ^[2] = ax² + 2bxy + cy².

    κ_vol es la curvatura que ve el término ε² del volumen, κ/3.
    """
    return NormalFormInvariants(
        kappa=6.0 * (a + c),
        chi=2.0 * math.sqrt((c - a) ** 2 + 4.0 * b * b),
        kappa_vol=2.0 * (a + c),
    )


def truncated_constants(gamma: Polynomial, pt: Sequence[float]) -> dict[tuple[int, int, int], float]:
    """Constantes cerradas de X1 = ∂x − y(1+γ)/2 ∂z, X2 = ∂y + x(1+γ)/2 ∂z.

    Solo válido para γ cuadrática homogénea sin z (β = 0), donde el marco
    truncado coincide con la forma normal.
    """
    x, y, z = pt
    g = gamma.evaluate(x, y, z)
    gx, gy = gamma.partial("x"), gamma.partial("y")
    vx, vy = gx.evaluate(x, y, z), gy.evaluate(x, y, z)
    vxx = gx.partial("x").evaluate(x, y, z)
    vxy = gx.partial("y").evaluate(x, y, z)
    vyy = gy.partial("y").evaluate(x, y, z)
    d = 1.0 + 2.0 * g
    d2 = d * d
    return {
        (1, 2, 0): 1.0,
        (1, 2, 1): 2.0 * vy / d,
        (1, 2, 2): -2.0 * vx / d,
        (0, 1, 1): -2.0 * (d * vxy - 2.0 * vx * vy) / d2,
        (0, 1, 2): 2.0 * (d * vxx - 2.0 * vx * vx) / d2,
        (0, 2, 1): -2.0 * (d * vyy - 2.0 * vy * vy) / d2,
        (0, 2, 2): 2.0 * (d * vxy - 2.0 * vx * vy) / d2,
    }


def reeb_residuals(s: ContactStructure, pt: Sequence[float]) -> tuple[float, float, float, float]:
    """|ω(X0) − 1| y |dω(X0, ∂x)|, |dω(X0, ∂y)|, |dω(X0, ∂z)|."""
    x0 = s.reeb.at(pt)
    w = np.array([fn.at(pt) for fn in s.omega])
    dw = np.array([[fn.at(pt) for fn in row] for row in s.domega])
    contraction = x0 @ dw
    return (abs(float(w @ x0) - 1.0), *(abs(float(v)) for v in contraction))
