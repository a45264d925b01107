from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import integrate

from volumenes import heisenberg
from volumenes.contact import ORIGIN, ContactStructure, chi_at, kappa_at
from volumenes.cutdomain import TWO_PI, OmegaDomain
from volumenes.dilation import DilatedStructure, dilate_point
from volumenes.errors import ConfigError, ConvergenceError, FitError, QuadratureError, VolumenesError
from volumenes.geodesic import DEFAULT_BATCH, DEFAULT_FD_STEP, jacobian_arrays

logger = logging.getLogger(__name__)

DEFAULT_LADDER = (0.20, 0.15, 0.10, 0.07, 0.05)
V2_LADDER = (0.1, 0.05, 0.025)
MIN_ORDER = 1.5
# Diferencias sucesivas por debajo de esto son ruido: no se estima el orden.
ORDER_NOISE = 1e-12
MAX_COND = 1e8


@dataclass(frozen=True)
class QuadratureSpec:
    n_rho: int = 16
    n_theta: int = 32
    n_w: int = 48
    tol_ode: float = 1e-10

    def __post_init__(self) -> None:
        if min(self.n_rho, self.n_theta, self.n_w) < 4:
            raise ConfigError(f"Cuadratura con menos de 4 nodos: {self}")
        if self.n_theta % 2:
            raise ConfigError(f"n_theta debe ser par: {self.n_theta}")

    @classmethod
    def parse(cls, text: str, tol_ode: float = 1e-10) -> QuadratureSpec:
        try:
            r, t, w = (int(p) for p in str(text).split(","))
        except ValueError:
            raise ConfigError(f"--quad espera R,T,W enteros: {text!r}") from None
        return cls(r, t, w, tol_ode)

    def doubled(self) -> QuadratureSpec:
        return replace(self, n_rho=2 * self.n_rho, n_theta=2 * self.n_theta, n_w=2 * self.n_w)

    @property
    def n_nodes(self) -> int:
        return self.n_rho * self.n_theta * self.n_w


@dataclass(frozen=True)
class BallVolumeResult:
    ok: bool
    eps: float
    volume: float | None = None
    error: str | None = None
    negative_nodes: int = 0
    domain_violation: bool = False
    convergence: float | None = None
    n_nodes: int = 0

    @property
    def ratio(self) -> float | None:
        return None if self.volume is None else self.volume / self.eps**4


@dataclass(frozen=True)
class ExpansionReport:
    eps_list: tuple[float, ...]
    volumes: tuple[float, ...]
    c0_est: float
    slope_est: float
    residuals: tuple[float, ...]
    kappa: float = 0.0
    chi: float = 0.0
    kappa_vol: float = 0.0
    c0_theory: float = field(default_factory=heisenberg.c0)
    slope_theory: float = 0.0
    monotone: bool = True

    @property
    def ratios(self) -> tuple[float, ...]:
        return tuple(v / e**4 for v, e in zip(self.volumes, self.eps_list))


@dataclass(frozen=True)
class _Nodes:
    rho: np.ndarray
    theta: np.ndarray
    w: np.ndarray
    weight: np.ndarray


def _gauss(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    x, wt = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * wt


def _nodes(quad: QuadratureSpec, domain: OmegaDomain | None) -> _Nodes:
    """Producto tensorial ρ (Gauss), θ (uniforme periódica), w (Gauss en [−B, B])."""
    r, wr = _gauss(quad.n_rho, 0.0, 1.0)
    th = 2.0 * math.pi * np.arange(quad.n_theta) / quad.n_theta
    wth = np.full(quad.n_theta, 2.0 * math.pi / quad.n_theta)
    xw, ww = np.polynomial.legendre.leggauss(quad.n_w)
    R, T = np.meshgrid(r, th, indexing="ij")
    WR, WT = np.meshgrid(wr, wth, indexing="ij")
    if domain is None:
        W = TWO_PI * np.broadcast_to(xw, R.shape + (quad.n_w,))
        WW = TWO_PI * np.broadcast_to(ww, R.shape + (quad.n_w,))
    else:
        W, WW = domain.w_nodes(R, T, xw, ww)
    weight = (WR * WT)[..., None] * WW
    shape = W.shape
    return _Nodes(
        rho=np.broadcast_to(R[..., None], shape).ravel(),
        theta=np.broadcast_to(T[..., None], shape).ravel(),
        w=np.asarray(W).ravel(),
        weight=np.asarray(weight).ravel(),
    )


def _integrand(
    structure: ContactStructure,
    eps: float,
    nodes: _Nodes,
    quad: QuadratureSpec,
    fd_step: float,
    batch_size: int,
    workers: int,
) -> tuple[np.ndarray, int]:
    """ψ(δ_ε exp^ε)·|det J exp^ε| en cada nodo y el número de nodos con det < 0."""
    dilated = DilatedStructure(eps, structure).structure
    det, ends = jacobian_arrays(
        dilated,
        nodes.rho,
        nodes.theta,
        nodes.w,
        fd_step,
        quad.tol_ode,
        batch_size=batch_size,
        workers=workers,
        with_center=True,
    )
    psi = structure.popp_values(*dilate_point(eps, (ends[0], ends[1], ends[2])))
    return psi * np.abs(det), int(np.count_nonzero(det < 0))


def omega_domain(structure: ContactStructure, eps: float) -> OmegaDomain:
    return OmegaDomain(eps=eps, kappa=kappa_at(structure, ORIGIN), chi=chi_at(structure, ORIGIN))


def _volume_once(
    structure: ContactStructure, eps: float, quad: QuadratureSpec, fd_step: float, batch_size: int, workers: int
) -> tuple[float, int]:
    nodes = _nodes(quad, omega_domain(structure, eps))
    values, negative = _integrand(structure, eps, nodes, quad, fd_step, batch_size, workers)
    # suma en orden fijo de nodos
    return eps**4 * float(np.dot(nodes.weight, values)), negative


def integrate_ball(
    structure: ContactStructure,
    eps: float,
    quad: QuadratureSpec | None = None,
    *,
    fd_step: float = DEFAULT_FD_STEP,
    check_tol: float | None = None,
    batch_size: int = DEFAULT_BATCH,
    workers: int = 1,
) -> BallVolumeResult:
    """vol B(p, ε) = ε⁴ ∫_{Ω^ε(1)} ψ(δ_ε exp^ε)·|det J exp^ε| dw dθ dρ.

    La frontera de Ω^ε(1) es la asintótica truncada; su error no afecta al
    término ε² porque det J exp⁰ se anula en w = ±2π.
    Con ``check_tol`` se repite con el doble de nodos y se lanza QuadratureError
    si el cambio relativo supera 10·check_tol.
    """
    quad = quad or QuadratureSpec()
    if eps <= 0:
        raise ConfigError(f"epsilon debe ser positivo: {eps}")
    volume, negative = _volume_once(structure, eps, quad, fd_step, batch_size, workers)
    if negative:
        logger.warning(f"eps={eps}: {negative} nodos con det J < 0 dentro de Ω")
    convergence = None
    if check_tol is not None:
        finer, _ = _volume_once(structure, eps, quad.doubled(), fd_step, batch_size, workers)
        convergence = abs(finer - volume) / abs(volume)
        if convergence > 10.0 * check_tol:
            raise QuadratureError(
                f"eps={eps}: duplicar nodos cambia el volumen en {convergence:.3e} (> {10 * check_tol:.1e})"
            )
    logger.info(f"eps={eps}: volumen={volume:.12g} ({quad.n_nodes} nodos)")
    return BallVolumeResult(
        ok=True,
        eps=eps,
        volume=volume,
        negative_nodes=negative,
        domain_violation=negative > 0,
        convergence=convergence,
        n_nodes=quad.n_nodes,
    )


def try_integrate_ball(structure: ContactStructure, eps: float, quad: QuadratureSpec | None = None, **kwargs) -> BallVolumeResult:
    try:
        return integrate_ball(structure, eps, quad, **kwargs)
    except VolumenesError as e:
        logger.error(f"eps={eps}: {e}")
        return BallVolumeResult(ok=False, eps=eps, error=str(e))


def ball_volume(structure: ContactStructure, eps: float, quad: QuadratureSpec | None = None, **kwargs) -> float:
    return float(integrate_ball(structure, eps, quad, **kwargs).volume)


def predicted_ratio(kappa_vol: float, eps: float) -> float:
    """vol/ε⁴ ≈ c0(1 − c1·κ_vol·ε²)."""
    return heisenberg.c0() * (1.0 - heisenberg.c1() * kappa_vol * eps * eps)


def volume_kappa(structure: ContactStructure) -> float:
    """Curvatura que ve el término ε² del volumen: κ/3."""
    return kappa_at(structure, ORIGIN) / 3.0


def _check_ladder(eps_list: Sequence[float], min_len: int, max_eps: float = 0.3) -> tuple[float, ...]:
    ladder = tuple(float(e) for e in eps_list)
    if len(ladder) < min_len:
        raise ConfigError(f"La escalera de eps necesita al menos {min_len} valores: {ladder}")
    if any(e <= 0 or e > max_eps for e in ladder):
        raise ConfigError(f"Valores de eps fuera de (0, {max_eps}]: {ladder}")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigError(f"La escalera de eps debe ser estrictamente decreciente: {ladder}")
    return ladder


def fit_ratios(eps_list: Sequence[float], volumes: Sequence[float]) -> tuple[float, float, np.ndarray]:
    """Mínimos cuadrados de vol/ε⁴ = c0·(1 + slope·ε²)."""
    eps = np.asarray(eps_list, dtype=float)
    ratios = np.asarray(volumes, dtype=float) / eps**4
    design = np.column_stack([np.ones_like(eps), eps**2])
    if np.linalg.cond(design) > MAX_COND:
        raise FitError(f"Escalera de eps mal condicionada: {tuple(eps)}")
    (a, b), *_ = np.linalg.lstsq(design, ratios, rcond=None)
    if a == 0:
        raise FitError("c0 estimado nulo")
    return float(a), float(b / a), ratios - design @ np.array([a, b])


def fit_expansion(
    structure: ContactStructure,
    eps_list: Sequence[float] = DEFAULT_LADDER,
    quad: QuadratureSpec | None = None,
    **kwargs,
) -> ExpansionReport:
    ladder = _check_ladder(eps_list, 4)
    volumes = []
    for eps in ladder:
        volumes.append(ball_volume(structure, eps, quad, **kwargs))
    c0_est, slope_est, residuals = fit_ratios(ladder, volumes)
    # la escalera es decreciente: los volúmenes también deben decrecer
    monotone = all(b < a for a, b in zip(volumes, volumes[1:]))
    if not monotone:
        logger.warning(f"Volúmenes no monótonos en eps: {volumes}")
    kappa = kappa_at(structure, ORIGIN)
    kappa_vol = kappa / 3.0
    report = ExpansionReport(
        eps_list=ladder,
        volumes=tuple(volumes),
        c0_est=c0_est,
        slope_est=slope_est,
        residuals=tuple(float(r) for r in residuals),
        kappa=kappa,
        chi=chi_at(structure, ORIGIN),
        kappa_vol=kappa_vol,
        slope_theory=-heisenberg.c1() * kappa_vol,
        monotone=monotone,
    )
    logger.info(f"Ajuste: c0_est={c0_est:.12g} slope_est={slope_est:.12g} (teoría {report.slope_theory:.12g})")
    return report


def _theta_grid(n_theta: int) -> np.ndarray:
    return 2.0 * math.pi * np.arange(n_theta) / n_theta


def v2_samples(
    structure: ContactStructure,
    rho: float,
    w: float,
    eps: float,
    n_theta: int = 16,
    fd_step: float = DEFAULT_FD_STEP,
    tol: float = 1e-11,
) -> np.ndarray:
    """(det J exp^ε − det J exp⁰)/ε² en una malla uniforme de θ."""
    theta = _theta_grid(n_theta)
    dilated = DilatedStructure(eps, structure).structure
    jac = jacobian_arrays(dilated, np.full(n_theta, rho), theta, np.full(n_theta, w), fd_step, tol)
    return (jac - heisenberg.heis_jacobian(rho, theta, w)) / eps**2


def v2_ladder(
    structure: ContactStructure,
    rho: float,
    w: float,
    eps_ladder: Sequence[float] = V2_LADDER,
    **kwargs,
) -> np.ndarray:
    return np.array([float(np.mean(v2_samples(structure, rho, w, e, **kwargs))) for e in eps_ladder])


def observed_order(eps_ladder: Sequence[float], values: Sequence[float]) -> float | None:
    """Orden p de V(ε) = V* + C ε^p a partir de las tres últimas entradas."""
    if len(values) < 3:
        return None
    e1, e2, e3 = eps_ladder[-3:]
    d1 = values[-3] - values[-2]
    d2 = values[-2] - values[-1]
    if abs(d1) < ORDER_NOISE or abs(d2) < ORDER_NOISE:
        return None
    ratio = e1 / e2
    return math.log(abs(d1 / d2)) / math.log(ratio)


def richardson_eps2(eps_ladder: Sequence[float], values: Sequence[float]) -> float:
    """Extrapola a ε → 0 suponiendo serie en ε² con las dos últimas entradas."""
    if len(values) < 2:
        return float(values[-1])
    r2 = (eps_ladder[-2] / eps_ladder[-1]) ** 2
    return float((r2 * values[-1] - values[-2]) / (r2 - 1.0))


def v2_theta_average(
    structure: ContactStructure,
    rho: float,
    w: float,
    eps_ladder: Sequence[float] = V2_LADDER,
    **kwargs,
) -> float:
    if not (0 < rho <= 1):
        raise ConfigError(f"rho fuera de (0, 1]: {rho}")
    if not (0 < abs(w) < TWO_PI - 0.1):
        raise ConfigError(f"|w| fuera de (0, 2π − 0.1): {w}")
    ladder = _check_ladder(eps_ladder, 2)
    values = v2_ladder(structure, rho, w, ladder, **kwargs)
    order = observed_order(ladder, values)
    if order is not None and order < MIN_ORDER:
        raise ConvergenceError(f"Orden observado {order:.2f} < {MIN_ORDER} en eps={ladder}")
    limit = richardson_eps2(ladder, values)
    logger.info(f"v2(ρ={rho}, w={w}) ≈ {limit:.12g} (orden observado {order})")
    return limit


def harmonic_residual(
    structure: ContactStructure,
    rho: float,
    w: float,
    eps: float,
    n_theta: int = 16,
    **kwargs,
) -> np.ndarray:
    """Parte armónica en θ del coeficiente ε² del jacobiano.

    Se resta el promedio predicho ρ⁵·(κ_vol/2)·g0(w); la integral en θ del
    resultado debe ser ~0.
    """
    samples = v2_samples(structure, rho, w, eps, n_theta, **kwargs)
    return samples - rho**5 * 0.5 * volume_kappa(structure) * float(heisenberg.g0(w))


def u2_integral_check() -> tuple[float, float]:
    lhs, _ = integrate.quad(
        lambda v: float(heisenberg.u2_integrand(v)),
        -TWO_PI,
        TWO_PI,
        epsabs=heisenberg.QUAD_TOL,
        epsrel=heisenberg.QUAD_TOL,
        limit=200,
    )
    return lhs, heisenberg.c1_rhs()


def u2_domain_integral(
    structure: ContactStructure,
    eps: float,
    quad: QuadratureSpec | None = None,
    *,
    fd_step: float = DEFAULT_FD_STEP,
    batch_size: int = DEFAULT_BATCH,
    workers: int = 1,
) -> float:
    """∫_Ω (u^ε − u⁰)/ε² sobre Ω = {ρ ≤ 1, |w| ≤ 2π}; tiende a κ_vol·c1_rhs()."""
    quad = quad or QuadratureSpec()
    nodes = _nodes(quad, None)
    values, _ = _integrand(structure, eps, nodes, quad, fd_step, batch_size, workers)
    u0 = heisenberg.heis_jacobian(nodes.rho, nodes.theta, nodes.w)
    return float(np.dot(nodes.weight, (values - u0) / eps**2))
