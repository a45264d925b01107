from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from volumenes.contact import ContactStructure
from volumenes.errors import ConjugateTimeNotFound, IntegrationError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_FD_STEP = 1e-4
DEFAULT_BATCH = 20000
MAX_STEPS = 1_000_000
# RK45: seis evaluaciones por paso aceptado
_MAX_RHS_CALLS = 6 * MAX_STEPS
_MIN_SAMPLES = 65


@dataclass(frozen=True)
class CylCovector:
    rho: float
    theta: float
    w: float

    def __post_init__(self) -> None:
        if self.rho < 0:
            raise ValueError(f"rho debe ser >= 0: {self.rho}")

    @property
    def h(self) -> tuple[float, float, float]:
        """(h1, h2, h0)."""
        return (self.rho * math.cos(self.theta), self.rho * math.sin(self.theta), -self.w)


@dataclass(frozen=True)
class GeodesicState:
    pt: tuple[float, float, float]
    theta: float
    w: float


@dataclass(frozen=True)
class GeodesicTrace:
    samples: tuple[tuple[float, GeodesicState], ...]
    rho: float
    tolerance: float
    n_evaluations: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])

    @property
    def endpoint(self) -> tuple[float, float, float]:
        return self.samples[-1][1].pt

    def as_array(self) -> np.ndarray:
        """Filas t, x, y, z, theta, w."""
        return np.array([(t, *s.pt, s.theta, s.w) for t, s in self.samples])


def _check_tol(tol: float) -> float:
    tol = float(tol)
    if not (1e-13 <= tol <= 1e-6):
        raise ValueError(f"tol fuera de [1e-13, 1e-6]: {tol}")
    return tol


def _rhs_batch(structure: ContactStructure, rho: np.ndarray, Y: np.ndarray) -> np.ndarray:
    x, y, z, theta, w = Y
    coef = structure.flow_coefficients(x, y, z)
    ct, st = np.cos(theta), np.sin(theta)
    a = coef[6] * ct * ct + coef[7] * ct * st + coef[8] * st * st
    b = coef[9] * ct + coef[10] * st
    out = np.empty_like(Y)
    out[0:3] = rho * (ct * coef[0:3] + st * coef[3:6])
    out[3] = w - rho * b
    out[4] = -rho * rho * a
    return out


def rhs(structure: ContactStructure, rho: float, state: GeodesicState) -> np.ndarray:
    """Derivada de (x, y, z, θ, w)."""
    Y = np.array([[*state.pt, state.theta, state.w]], dtype=float).T
    return _rhs_batch(structure, np.array([float(rho)]), Y)[:, 0]


def _solve(
    structure: ContactStructure,
    rho: np.ndarray,
    theta: np.ndarray,
    w: np.ndarray,
    t_final: float,
    tol: float,
    dense: bool = False,
):
    n = rho.size
    y0 = np.concatenate([np.zeros(3 * n), theta, w])
    calls = 0

    def fun(_t: float, flat: np.ndarray) -> np.ndarray:
        nonlocal calls
        calls += 1
        if calls > _MAX_RHS_CALLS:
            raise IntegrationError(f"Se agotó el presupuesto de {MAX_STEPS} pasos")
        return _rhs_batch(structure, rho, flat.reshape(5, n)).ravel()

    sol = solve_ivp(fun, (0.0, float(t_final)), y0, method="RK45", rtol=tol, atol=tol, dense_output=dense)
    if not sol.success:
        raise IntegrationError(f"Fallo del integrador: {sol.message}")
    return sol


def _map_batches(
    func: Callable[[slice], np.ndarray], n: int, batch_size: int, workers: int
) -> list[np.ndarray]:
    slices = [slice(i, min(i + batch_size, n)) for i in range(0, n, max(1, batch_size))]
    if workers <= 1 or len(slices) <= 1:
        return [func(s) for s in slices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map conserva el orden de los lotes
        return list(pool.map(func, slices))


def _covector_arrays(covectors) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(covectors, CylCovector):
        covectors = [covectors]
    if isinstance(covectors, (list, tuple)) and covectors and isinstance(covectors[0], CylCovector):
        arr = np.array([(c.rho, c.theta, c.w) for c in covectors], dtype=float).T
    else:
        arr = np.asarray(covectors, dtype=float).reshape(3, -1)
    return arr[0].copy(), arr[1].copy(), arr[2].copy()


def exp_arrays(
    structure: ContactStructure,
    rho,
    theta,
    w,
    tol: float = DEFAULT_TOL,
    *,
    batch_size: int = DEFAULT_BATCH,
    workers: int = 1,
) -> np.ndarray:
    """Extremos exp(ρ, θ, w) en t = 1 para arrays; forma (3, N)."""
    tol = _check_tol(tol)
    rho, theta, w = (np.asarray(v, dtype=float).ravel() for v in np.broadcast_arrays(rho, theta, w))
    out = np.zeros((3, rho.size))
    moving = np.flatnonzero(rho != 0.0)
    if moving.size == 0:
        return out

    def run(s: slice) -> np.ndarray:
        idx = moving[s]
        sol = _solve(structure, rho[idx], theta[idx], w[idx], 1.0, tol)
        logger.debug(f"Lote de {idx.size} geodésicas: {sol.nfev} evaluaciones")
        return sol.y[:, -1].reshape(5, idx.size)[:3]

    parts = _map_batches(run, moving.size, batch_size, workers)
    out[:, moving] = np.concatenate(parts, axis=1)
    return out


def exp_batch(structure: ContactStructure, covectors, tol: float = DEFAULT_TOL, **kwargs) -> np.ndarray:
    rho, theta, w = _covector_arrays(covectors)
    return exp_arrays(structure, rho, theta, w, tol, **kwargs)


def exp_map(structure: ContactStructure, cov: CylCovector, tol: float = DEFAULT_TOL) -> tuple[float, float, float]:
    if cov.rho == 0:
        return (0.0, 0.0, 0.0)
    end = exp_arrays(structure, cov.rho, cov.theta, cov.w, tol)[:, 0]
    return (float(end[0]), float(end[1]), float(end[2]))


def integrate(
    structure: ContactStructure, cov: CylCovector, t_final: float = 1.0, tol: float = DEFAULT_TOL
) -> GeodesicTrace:
    tol = _check_tol(tol)
    if t_final <= 0:
        raise ValueError(f"t_final debe ser positivo: {t_final}")
    sol = _solve(
        structure,
        np.array([cov.rho]),
        np.array([cov.theta]),
        np.array([cov.w]),
        t_final,
        tol,
        dense=True,
    )
    times = np.union1d(np.linspace(0.0, t_final, _MIN_SAMPLES), sol.t)
    values = sol.sol(times)
    values[:, 0] = (0.0, 0.0, 0.0, cov.theta, cov.w)
    samples = tuple(
        (float(t), GeodesicState((float(v[0]), float(v[1]), float(v[2])), float(v[3]), float(v[4])))
        for t, v in zip(times, values.T)
    )
    return GeodesicTrace(samples=samples, rho=cov.rho, tolerance=tol, n_evaluations=int(sol.nfev))


def jacobian_arrays(
    structure: ContactStructure,
    rho,
    theta,
    w,
    fd_step: float = DEFAULT_FD_STEP,
    tol: float = DEFAULT_TOL,
    *,
    batch_size: int = DEFAULT_BATCH,
    workers: int = 1,
    with_center: bool = False,
):
    """det ∂exp/∂(ρ, θ, w) por diferencias centrales con un nivel de Richardson.

    Las 12 trayectorias de la plantilla de cada nodo (pasos ±h, ±h/2 en cada
    parámetro) van siempre en el mismo lote. Con ``with_center`` también se
    integra el propio nodo y se devuelve (det, extremos (3, N)).
    """
    rho, theta, w = (np.asarray(v, dtype=float).ravel() for v in np.broadcast_arrays(rho, theta, w))
    if np.any(rho <= 0):
        raise ValueError("jacobian_exp requiere rho > 0")
    n = rho.size
    h = float(fd_step)
    steps = np.array([h, -h, h / 2, -h / 2])
    base = np.stack([rho, theta, w], axis=1)  # (n, 3)
    stencil = np.repeat(base[:, None, None, :], 3, axis=1).repeat(4, axis=2)  # (n, param, step, 3)
    for p in range(3):
        stencil[:, p, :, p] += steps[None, :]
    per_node = 13 if with_center else 12
    pts = stencil.reshape(n, 12, 3)
    if with_center:
        pts = np.concatenate([pts, base[:, None, :]], axis=1)
    flat = pts.reshape(-1, 3).T
    batch = max(per_node, (int(batch_size) // per_node) * per_node)
    ends = exp_arrays(structure, flat[0], flat[1], flat[2], tol, batch_size=batch, workers=workers)
    ends = ends.reshape(3, n, per_node)
    sten = ends[:, :, :12].reshape(3, n, 3, 4)  # (coord, node, param, step)
    d_h = (sten[..., 0] - sten[..., 1]) / (2 * h)
    d_h2 = (sten[..., 2] - sten[..., 3]) / h
    jac = (4.0 * d_h2 - d_h) / 3.0  # (coord, node, param)
    det = np.linalg.det(jac.transpose(1, 0, 2))
    if with_center:
        return det, ends[:, :, 12]
    return det


def jacobian_batch(
    structure: ContactStructure, covectors, fd_step: float = DEFAULT_FD_STEP, tol: float = DEFAULT_TOL, **kwargs
) -> np.ndarray:
    rho, theta, w = _covector_arrays(covectors)
    return jacobian_arrays(structure, rho, theta, w, fd_step, tol, **kwargs)


def jacobian_exp(
    structure: ContactStructure, cov: CylCovector, fd_step: float = DEFAULT_FD_STEP, tol: float = DEFAULT_TOL
) -> float:
    return float(jacobian_arrays(structure, cov.rho, cov.theta, cov.w, fd_step, tol)[0])


def first_conjugate_time(
    structure: ContactStructure,
    theta: float,
    w: float,
    tol: float = 1e-6,
    *,
    ode_tol: float = DEFAULT_TOL,
    fd_step: float = DEFAULT_FD_STEP,
) -> float:
    """Primer t > 0 donde cambia de signo det J exp en (t, θ, t·w)."""
    if w == 0:
        raise ValueError("first_conjugate_time requiere w != 0")
    period = 2.0 * math.pi / abs(w)
    dt = 0.02 * period
    grid = np.arange(1, int(round(3.0 * period / dt)) + 1) * dt

    def jac(t):
        t = np.asarray(t, dtype=float)
        return jacobian_arrays(structure, t, theta, t * w, fd_step, ode_tol)

    values = jac(grid)
    sign0 = np.sign(values[0])
    flips = np.flatnonzero(np.sign(values) != sign0)
    if sign0 == 0 or flips.size == 0:
        raise ConjugateTimeNotFound(f"Sin cambio de signo antes de t={grid[-1]:.6g} (θ={theta}, w={w})")
    k = int(flips[0])
    lo, hi = grid[k - 1], grid[k]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if np.sign(jac(mid)[0]) == sign0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def trace_to_csv(trace: GeodesicTrace, path: str | Path | None = None, stream=None) -> None:
    """Exporta la traza con columnas t,x,y,z,theta,w (12 cifras significativas)."""
    rows: Iterable[Sequence[float]] = trace.as_array()

    def write(fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "x", "y", "z", "theta", "w"])
        for row in rows:
            writer.writerow([f"{v:.12g}" for v in row])

    if stream is not None:
        write(stream)
        return
    if path is None:
        raise ValueError("Se requiere path o stream")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write(fh)
