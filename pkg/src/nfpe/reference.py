"""Conservative finite-difference solver for the full mean-field equation.

The equation is kept in flux form ``u_t = J_x`` with
``J = (alpha x + kappa beta) u + eps (f + (a x + g)^2) u_x``. Nodes carry
trapezoid control volumes (half cells at the ends) and the end fluxes are
zero, so the trapezoid norm is conserved by every step up to round-off.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np
from scipy.linalg import solve_banded

from .errors import CFLError, NumericalError, ParameterError
from .grid import DensityGrid, trapezoid_weights
from .model import CoefficientSet, ModelParams
from .moments import moment_ode_solve

logger = logging.getLogger(__name__)

NORM_DRIFT_TOL = 1e-6
NEGATIVE_TOL = 1e-8
EDGE_MASS_TOL = 1e-10


@dataclass(frozen=True)
class FdConfig:
    x_min: float
    x_max: float
    nx: int
    dt: float
    scheme: str = "semi-implicit"
    bc: str = "zero-flux"

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ParameterError("x_min must be < x_max")
        if self.nx < 3:
            raise ParameterError("nx must be >= 3")
        if not self.dt > 0:
            raise ParameterError("dt must be > 0")
        if self.scheme not in ("explicit", "semi-implicit"):
            raise ParameterError(f"unknown scheme {self.scheme!r}")
        if self.bc != "zero-flux":
            raise ParameterError("only zero-flux boundaries are supported")

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.nx)


def max_diffusion(params: ModelParams, coeffs: CoefficientSet, x_min, x_max, times):
    times = np.atleast_1d(times)
    f = np.asarray(coeffs.f(times), float)
    g = np.asarray(coeffs.g(times), float)
    w = np.maximum(np.abs(params.a * x_min + g), np.abs(params.a * x_max + g))
    return float(params.epsilon * np.max(f + w * w))


def default_config(params, coeffs, mean, sd, nx=2001, tau_end=1.0, scheme="semi-implicit",
                   width=10.0, dt=None):
    """Grid of ``mean +- width*sd``, explicit dt defaulting to dx^2/(4 max D)."""
    x_min, x_max = mean - width * sd, mean + width * sd
    dx = (x_max - x_min) / (nx - 1)
    if dt is None:
        times = np.linspace(params.s, tau_end, 21)
        d_max = max_diffusion(params, coeffs, x_min, x_max, times)
        dt = dx * dx / (4.0 * d_max) if scheme == "explicit" else 1e-3
    return FdConfig(x_min, x_max, nx, dt, scheme)


class FdResult(NamedTuple):
    densities: List[DensityGrid]
    times: np.ndarray
    norm_drift: float
    min_value: float
    edge_mass: float
    beta: np.ndarray

    def __getitem__(self, item):
        if isinstance(item, int):
            return self.densities[item]
        return tuple.__getitem__(self, item)

    def __len__(self):
        return len(self.densities)


class _Operator:
    """Tridiagonal flux-form operator L(t, beta) with ``du/dt = L u``."""

    def __init__(self, params: ModelParams, coeffs: CoefficientSet, x: np.ndarray):
        self.params = params
        self.coeffs = coeffs
        self.dx = x[1] - x[0]
        self.faces = 0.5 * (x[1:] + x[:-1])
        self.inv_w = 1.0 / trapezoid_weights(x.size, self.dx)

    def bands(self, t, beta):
        p, c = self.params, self.coeffs
        b = p.alpha * self.faces + p.kappa * beta
        d = p.epsilon * (float(c.f(t)) + (p.a * self.faces + float(c.g(t))) ** 2) / self.dx
        up = 0.5 * b + d        # J_{i+1/2} coefficient of u_{i+1}
        lo = 0.5 * b - d        # J_{i+1/2} coefficient of u_i
        n = self.inv_w.size
        diag = np.zeros(n)
        diag[:-1] += lo
        diag[1:] -= up
        upper = up * self.inv_w[:-1]             # row i, column i+1
        lower = -lo * self.inv_w[1:]             # row i+1, column i
        return lower, diag * self.inv_w, upper

    @staticmethod
    def apply(bands, u):
        lower, diag, upper = bands
        out = diag * u
        out[:-1] += upper * u[1:]
        out[1:] += lower * u[:-1]
        return out


def _snap_times(times, s, dt, n_steps):
    idx = []
    for t in times:
        k = int(round((t - s) / dt))
        if abs(s + k * dt - t) > 1e-9 * max(1.0, abs(t)) or not 0 <= k <= n_steps:
            raise ParameterError(f"output time {t} is not on the time grid (dt = {dt})")
        idx.append(k)
    return idx


def fd_solve(params: ModelParams, coeffs: CoefficientSet, gamma: DensityGrid,
             cfg: FdConfig, tau_end: float, times=None, feedback: bool = False,
             X_gamma: Optional[float] = None) -> FdResult:
    """Evolve ``gamma`` from ``params.s`` to ``tau_end``.

    Parameters
    ----------
    times : sequence of float, optional
        Output times on the step grid; defaults to ``[tau_end]``.
    feedback : bool
        For a self-consistent beta, take beta from the grid moment at every
        step (fixed-point iterated for the implicit scheme) instead of the
        precomputed moment ODE solution.

    The step is shortened so that ``tau_end`` is hit exactly. The semi-implicit
    scheme is Crank-Nicolson for the whole (drift + diffusion) operator.
    """
    s = params.s
    if not tau_end > s:
        raise ParameterError("tau_end must be after the initial time")
    x = cfg.x
    dx = cfg.dx
    if gamma.n == cfg.nx and abs(gamma.x0 - cfg.x_min) < 1e-12 and abs(gamma.dx - dx) < 1e-15:
        u = gamma.values.copy()
    else:
        u = gamma.interpolator()(x)
    w = trapezoid_weights(cfg.nx, dx)
    norm0 = float(w @ u)
    edge = float(dx * (abs(u[0]) + abs(u[-1])) / max(norm0, 1e-300))
    if edge > EDGE_MASS_TOL:
        logger.warning("initial edge mass %.2e exceeds %.0e", edge, EDGE_MASS_TOL)

    n_steps = max(1, int(math.ceil((tau_end - s) / cfg.dt - 1e-9)))
    dt = (tau_end - s) / n_steps
    t_grid = s + dt * np.arange(n_steps + 1)
    out_idx = _snap_times([tau_end] if times is None else times, s, dt, n_steps)

    if cfg.scheme == "explicit":
        d_max = max_diffusion(params, coeffs, cfg.x_min, cfg.x_max, t_grid[::max(1, n_steps // 50)])
        if dt > dx * dx / (2.0 * d_max):
            raise CFLError(f"dt = {dt:.3e} exceeds dx^2/(2 max D) = {dx * dx / (2 * d_max):.3e}")

    if coeffs.self_consistent and not feedback:
        traj = moment_ode_solve(params, coeffs, float(w @ (x * u)) if X_gamma is None
                                else X_gamma, t_grid)
        beta_grid = traj.values
    elif coeffs.self_consistent:
        beta_grid = None
    else:
        beta_grid = np.asarray(coeffs.beta(t_grid), float) * np.ones(t_grid.size)

    op = _Operator(params, coeffs, x)
    wx = w * x
    betas = np.empty(n_steps + 1)
    betas[0] = float(wx @ u) if beta_grid is None else beta_grid[0]
    snapshots = {}
    if 0 in out_idx:
        snapshots[0] = u.copy()
    drift = 0.0
    min_value = float(u.min())
    bands_n = op.bands(t_grid[0], betas[0])
    for n in range(n_steps):
        t1 = t_grid[n + 1]
        if cfg.scheme == "explicit":
            u = u + dt * op.apply(bands_n, u)
            betas[n + 1] = float(wx @ u) if beta_grid is None else beta_grid[n + 1]
            bands_n = op.bands(t1, betas[n + 1])
        else:
            rhs = u + 0.5 * dt * op.apply(bands_n, u)
            beta1 = betas[n] if beta_grid is None else beta_grid[n + 1]
            for _ in range(8 if beta_grid is None else 1):
                lower, diag, upper = op.bands(t1, beta1)
                ab = np.zeros((3, cfg.nx))
                ab[0, 1:] = -0.5 * dt * upper
                ab[1] = 1.0 - 0.5 * dt * diag
                ab[2, :-1] = -0.5 * dt * lower
                u_new = solve_banded((1, 1), ab, rhs, check_finite=False)
                if beta_grid is not None:
                    break
                beta_new = float(wx @ u_new)
                converged = abs(beta_new - beta1) <= 1e-15 * max(1.0, abs(beta_new))
                beta1 = beta_new
                if converged:
                    break
            u = u_new
            betas[n + 1] = beta1
            bands_n = (lower, diag, upper) if beta_grid is not None else op.bands(t1, beta1)
        norm = float(w @ u)
        drift = max(drift, abs(norm - norm0))
        min_value = min(min_value, float(u.min()))
        if n + 1 in out_idx:
            snapshots[n + 1] = u.copy()

    if not np.all(np.isfinite(u)):
        raise NumericalError("finite-difference solution became non-finite")
    if drift > NORM_DRIFT_TOL:
        raise NumericalError(f"norm drift {drift:.2e} exceeds {NORM_DRIFT_TOL:.0e}")
    if min_value < -NEGATIVE_TOL:
        raise NumericalError(f"density went negative ({min_value:.2e})")
    densities = [DensityGrid(cfg.x_min, dx, snapshots[k], float(t_grid[k])) for k in out_idx]
    return FdResult(densities, t_grid[out_idx], drift, min_value, edge, betas)


class GridMetrics(NamedTuple):
    l1: float
    linf: float
    moment_diff: float
    variance_diff: float


def grid_metrics(u: DensityGrid, v: DensityGrid) -> GridMetrics:
    """Trapezoid L1, max norm and moment differences between two densities."""
    if not u.same_grid(v):
        raise ParameterError("densities live on different grids")
    diff = u.values - v.values
    l1 = u.integrate(np.abs(diff))
    linf = float(np.max(np.abs(diff)))
    moment_diff = u.moment(1) - v.moment(1)
    if u.norm() > 0 and v.norm() > 0:
        variance_diff = u.variance() - v.variance()
    else:
        variance_diff = math.nan
    return GridMetrics(l1, linf, moment_diff, variance_diff)
