"""Trajectory-concentrated asymptotic solution for general coefficients.

In the transformed variable the equation reads
``u_t = alpha u + (q/A+) u_y + eps u_yy``. With ``xi = (y - Y(t))/sqrt(eps)``
and ``u = phi(xi, t)``, ``phi = phi0 + sqrt(eps) phi1 + ...`` where

* ``Y`` follows ``Y' = -q0(Y)/A+(Y)``;
* ``phi0`` solves ``L0 phi0 = 0``, ``L0 = -d_t + d_xixi + R xi d_xi + alpha``;
* ``phi1`` solves ``L0 phi1 = -(Q0 xi^2 + Q1) d_xi phi0`` with zero data.

Both are heat-kernel integrals after the substitution ``z = h xi``,
``t' = int h^2``, ``h = exp(int R)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from .errors import (DomainError, ParameterError, ResolutionError, TrajectoryEscapeError,
                     TruncationError)
from .grid import DensityGrid, trapezoid_weights
from .moments import check_time_grid, rk4
from .quadrature import chunked_rows, gauss_legendre, hermite_e, window_rule
from .transform import TransformContext, drift_full, drift_zero, y_of_x

TRAJECTORY_TOL = 1e-8
EDGE_TOL = 1e-8


# --------------------------------------------------------------------------
# trajectory and coefficients

def _trajectory_rhs(ctx: TransformContext):
    def rhs(t, y):
        return -drift_zero(ctx, y, t)
    return rhs


def solve_trajectory(ctx: TransformContext, Y_s: float, tau_grid, tol=TRAJECTORY_TOL,
                     max_substeps: int = 1024):
    """RK4 solution of ``Y' + q0(Y)/A+(Y) = 0`` on a uniform grid from s.

    Sub-steps are doubled until the step-halving (Richardson) estimate is
    below ``tol`` per unit time; the finer solution is returned.
    """
    tau_grid = check_time_grid(tau_grid, ctx.params.s)
    rhs = _trajectory_rhs(ctx)
    span = tau_grid[-1] - tau_grid[0]
    substeps = 1
    with np.errstate(over="ignore", invalid="ignore"):
        coarse = rk4(rhs, Y_s, tau_grid, substeps)
        while True:
            fine = rk4(rhs, Y_s, tau_grid, 2 * substeps)
            bad = ~np.isfinite(fine)
            if np.any(bad):
                t_exit = float(tau_grid[np.argmax(bad)])
                raise TrajectoryEscapeError(
                    f"trajectory left the transform domain near t = {t_exit:g}", t_exit)
            err = float(np.max(np.abs(fine - coarse))) / 15.0
            if err <= tol * max(span, 1e-300) or 2 * substeps >= max_substeps:
                break
            substeps *= 2
            coarse = fine
    if err > tol * span:
        raise ResolutionError(f"trajectory error estimate {err:.2e} above tolerance")
    return fine


def expansion_coeffs(ctx: TransformContext, Y, tau_grid):
    """``R``, ``Q0``, ``Q1`` along the trajectory; ``Y'`` comes from the ODE."""
    p, c = ctx.params, ctx.coeffs
    a, alpha = p.a, p.alpha
    tau_grid = np.asarray(tau_grid, float)
    Y = np.asarray(Y, float)
    f = np.asarray(c.f(tau_grid), float) * np.ones_like(Y)
    f_dot = np.asarray(c.f_dot(tau_grid), float) * np.ones_like(Y)
    e_pos = np.exp(a * Y)
    e_neg = np.exp(-a * Y)
    a_plus = e_pos + f * e_neg
    a_minus = e_pos - f * e_neg
    y_dot = np.array([-float(drift_zero(ctx, yy, tt)) for yy, tt in zip(Y, tau_grid)])
    R = (f_dot * e_neg + alpha * a_plus + a * y_dot * a_minus) / a_plus
    Q1 = a * a_minus / a_plus
    Q0 = (a / (2.0 * a_plus)) * (-f_dot * e_neg + alpha * a_minus + a * y_dot * a_plus) - Q1 * R
    return R, Q0, Q1


def scale_and_time(R, tau_grid):
    """Scale ``h = exp(int R)`` (h(s) = 1) and mapped time ``t' = int h^2``."""
    tau_grid = np.asarray(tau_grid, float)
    log_h = cumulative_simpson(np.asarray(R, float), x=tau_grid, initial=0.0)
    h = np.exp(log_h)
    tau_prime = cumulative_simpson(h * h, x=tau_grid, initial=0.0)
    return h, tau_prime


# --------------------------------------------------------------------------
# state

def _zero_outside(spline, lo, hi):
    def fn(x):
        x = np.asarray(x, float)
        return np.where((x >= lo) & (x <= hi), spline(np.clip(x, lo, hi)), 0.0)
    return fn


@dataclass
class SemiclassicalState:
    """Trajectory, scale factor, mapped time and expansion coefficients.

    The initial profile ``gamma`` is a vectorized callable of xi, supported
    on ``gamma_support`` with feature size ``gamma_resolution``. States
    built by :func:`build_state` carry the transform context; manufactured
    states (e.g. constant coefficients) may leave it ``None``.
    """

    tau: np.ndarray
    Y: np.ndarray
    R: np.ndarray
    Q0: np.ndarray
    Q1: np.ndarray
    h: np.ndarray
    tau_prime: np.ndarray
    xi_grid: np.ndarray
    alpha: float
    gamma: Callable
    gamma_support: Tuple[float, float]
    gamma_resolution: float = 0.2
    ctx: Optional[TransformContext] = None
    n_eta: int = 24
    order: int = 8
    _cache: Dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.tau = np.asarray(self.tau, float)
        self.xi_grid = np.asarray(self.xi_grid, float)
        if abs(self.h[0] - 1.0) > 1e-14 or self.tau_prime[0] != 0.0:
            raise ParameterError("the state needs h(s) = 1 and t'(s) = 0")
        if np.any(np.diff(self.tau_prime) <= 0):
            raise ParameterError("mapped time must be strictly increasing")
        lo, hi = self.gamma_support
        if np.max(np.abs(self.gamma(np.array([lo, hi])))) >= 1e-12:
            raise TruncationError("initial profile does not decay at its support edges")
        self._splines = {name: CubicSpline(self.tau, getattr(self, name))
                         for name in ("Y", "R", "Q0", "Q1", "tau_prime")}
        self._splines["log_h"] = CubicSpline(self.tau, np.log(self.h))

    @property
    def s(self):
        return float(self.tau[0])

    def at(self, name, t):
        """Interpolated coefficient ``Y, R, Q0, Q1, h`` or ``tau_prime`` at t."""
        t = np.asarray(t, float)
        if np.any(t < self.tau[0] - 1e-12) or np.any(t > self.tau[-1] + 1e-12):
            raise DomainError(f"t outside the state's time grid [{self.tau[0]}, {self.tau[-1]}]")
        if name == "h":
            return np.exp(self._splines["log_h"](t))
        return self._splines[name](t)

    @classmethod
    def from_profile_samples(cls, values, xi_grid, **kwargs):
        """Helper turning samples on ``xi_grid`` into the spline profile."""
        xi_grid = np.asarray(xi_grid, float)
        spline = CubicSpline(xi_grid, values)
        return dict(gamma=_zero_outside(spline, xi_grid[0], xi_grid[-1]),
                    gamma_support=(float(xi_grid[0]), float(xi_grid[-1])),
                    gamma_resolution=4.0 * float(xi_grid[1] - xi_grid[0]), **kwargs)


def default_xi_grid(half_width=12.0, n=481):
    return np.linspace(-half_width, half_width, n)


def build_state(ctx: TransformContext, Y_s: float, tau_grid, gamma, xi_grid=None,
                gamma_support=None, gamma_resolution=0.2, **kwargs) -> SemiclassicalState:
    """Solve for the trajectory and all coefficients on ``tau_grid``.

    ``gamma`` is either a callable profile of xi or samples on ``xi_grid``.
    """
    if ctx.coeffs.self_consistent:
        raise ParameterError("resolve a self-consistent beta before building the state")
    if xi_grid is None:
        xi_grid = default_xi_grid()
    xi_grid = np.asarray(xi_grid, float)
    tau_grid = check_time_grid(tau_grid, ctx.params.s)
    Y = solve_trajectory(ctx, Y_s, tau_grid)
    R, Q0, Q1 = expansion_coeffs(ctx, Y, tau_grid)
    h, tau_prime = scale_and_time(R, tau_grid)
    if callable(gamma):
        profile = dict(gamma=gamma,
                       gamma_support=gamma_support or (float(xi_grid[0]), float(xi_grid[-1])),
                       gamma_resolution=gamma_resolution)
    else:
        profile = SemiclassicalState.from_profile_samples(gamma, xi_grid)
    return SemiclassicalState(tau=tau_grid, Y=Y, R=R, Q0=Q0, Q1=Q1, h=h, tau_prime=tau_prime,
                              xi_grid=xi_grid, alpha=ctx.params.alpha, ctx=ctx,
                              **profile, **kwargs)


# --------------------------------------------------------------------------
# heat-kernel convolutions

def _gaussian_convolution(fn, lo, hi, resolution, centers, sigma, ks, order=8,
                          scale=1.0):
    """``sigma^-k int N(t; c, sigma^2) He_k((t-c)/sigma) fn(t) dt`` for each k.

    ``scale`` multiplies the derivative factor, i.e. returns
    ``(scale/sigma)^k int ...`` for chain-rule factors.
    """
    centers = np.atleast_1d(np.asarray(centers, float))
    nodes, weights = window_rule(centers, sigma, lo, hi, resolution, order=order)
    out = {k: np.empty(centers.size) for k in ks}
    inv = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
    for rows in chunked_rows(centers.size, nodes.shape[1]):
        tn = nodes[rows]
        w = (tn - centers[rows, None]) / sigma
        base = inv * np.exp(-0.5 * w * w) * fn(tn) * weights[rows]
        for k in ks:
            term = base if k == 0 else base * hermite_e(k, w)
            out[k][rows] = term.sum(axis=1) * (scale / sigma) ** k
    return out


def heat_flow(state: SemiclassicalState, z, t, ks=(0,)):
    """Heat flow ``psi(z, t) = int G(t, z - z') gamma(z') dz'`` and its z-derivatives."""
    lo, hi = state.gamma_support
    z = np.asarray(z, float)
    if t <= 0:
        if any(k != 0 for k in ks):
            raise DomainError("derivatives of the profile at t' = 0 are not available")
        return {0: state.gamma(z)}
    return _gaussian_convolution(state.gamma, lo, hi, state.gamma_resolution, z,
                                 math.sqrt(2.0 * t), ks, order=state.order)


def phi0(state: SemiclassicalState, tau, gamma_xi=None, xi=None, derivs=(0,)):
    """Leading term on ``xi`` (default grid) and its xi-derivatives.

    Returns the profile for ``derivs == (0,)``, otherwise a dict ``k -> array``.
    At ``tau = s`` the initial profile is returned unchanged.
    """
    if gamma_xi is not None:
        kwargs = SemiclassicalState.from_profile_samples(gamma_xi, state.xi_grid)
        state = _with_profile(state, **kwargs)
    xi = state.xi_grid if xi is None else np.asarray(xi, float)
    if tau < state.s:
        raise DomainError("tau precedes the initial time")
    h = float(state.at("h", tau))
    tp = float(state.at("tau_prime", tau))
    grow = math.exp(state.alpha * (tau - state.s))
    psi = heat_flow(state, h * xi, tp if tau > state.s else 0.0, derivs)
    out = {k: grow * h ** k * psi[k] for k in derivs}
    if xi is state.xi_grid:
        _check_edges(out[derivs[0]], xi)
    return out[0] if tuple(derivs) == (0,) else out


def _with_profile(state, **kwargs):
    fields = {name: getattr(state, name) for name in (
        "tau", "Y", "R", "Q0", "Q1", "h", "tau_prime", "xi_grid", "alpha", "ctx",
        "n_eta", "order")}
    fields.update(kwargs)
    return SemiclassicalState(**fields)


def _check_edges(values, xi):
    dxi = xi[1] - xi[0]
    edge = dxi * (abs(values[0]) + abs(values[-1]))
    if edge > EDGE_TOL * max(1.0, float(np.max(np.abs(values)))):
        raise TruncationError(f"profile mass {edge:.2e} at the xi-grid edges")


def _source_spline(state: SemiclassicalState, eta, xi_fine):
    """Spline of ``(Q0 xi^2 + Q1) d_xi phi0(xi, eta)`` on a fine xi grid."""
    h = float(state.at("h", eta))
    tp = float(state.at("tau_prime", eta))
    grow = math.exp(state.alpha * (eta - state.s))
    if tp <= 0:
        raise DomainError("source needs eta > s")
    dpsi = heat_flow(state, h * xi_fine, tp, (1,))[1]
    source = (float(state.at("Q0", eta)) * xi_fine ** 2 + float(state.at("Q1", eta))) \
        * grow * h * dpsi
    return _zero_outside(CubicSpline(xi_fine, source), xi_fine[0], xi_fine[-1])


def phi1(state: SemiclassicalState, tau, xi=None, derivs=(0,)):
    """First correction by the Duhamel double integral.

    ``phi1 = int_s^tau d eta e^{alpha(tau-eta)} int G(t'(tau) - t'(eta),
    h(tau) xi - h(eta) xi') S(xi', eta) h(eta) dxi'`` with the source
    ``S = (Q0 xi'^2 + Q1) d_xi phi0``. The time integral uses
    ``eta = tau - sigma^2`` and Gauss-Legendre in sigma; xi-derivatives
    differentiate the outer kernel analytically.
    """
    xi = state.xi_grid if xi is None else np.asarray(xi, float)
    if tau < state.s:
        raise DomainError("tau precedes the initial time")
    out = {k: np.zeros(xi.size) for k in derivs}
    if tau == state.s:
        return out[0] if tuple(derivs) == (0,) else out
    xg = state.xi_grid
    xi_fine = np.linspace(xg[0], xg[-1], 2 * (xg.size - 1) + 1)
    res_source = max(4.0 * (xi_fine[1] - xi_fine[0]), state.gamma_resolution)
    g_nodes, g_weights = gauss_legendre(state.n_eta)
    root = math.sqrt(tau - state.s)
    h_tau = float(state.at("h", tau))
    tp_tau = float(state.at("tau_prime", tau))
    for node, weight in zip(g_nodes, g_weights):
        sig = 0.5 * root * (node + 1.0)
        eta = tau - sig * sig
        jac = 0.5 * root * weight * 2.0 * sig
        h_eta = float(state.at("h", eta))
        width = math.sqrt(2.0 * (tp_tau - float(state.at("tau_prime", eta)))) / h_eta
        source = _source_spline(state, eta, xi_fine)
        conv = _gaussian_convolution(source, xi_fine[0], xi_fine[-1], res_source,
                                     h_tau * xi / h_eta, width, derivs, order=state.order,
                                     scale=h_tau / h_eta)
        factor = jac * math.exp(state.alpha * (tau - eta))
        for k in derivs:
            out[k] += factor * conv[k]
    return out[0] if tuple(derivs) == (0,) else out


def profiles(state: SemiclassicalState, tau, derivs=(0, 1, 2)):
    """Cached ``(phi0, phi1)`` derivative dicts on the state's xi grid."""
    key = (float(tau), tuple(derivs))
    if key not in state._cache:
        as_dict = lambda r: r if isinstance(r, dict) else {0: r}
        state._cache[key] = (as_dict(phi0(state, tau, derivs=derivs)),
                             as_dict(phi1(state, tau, derivs=derivs)))
    return state._cache[key]


# --------------------------------------------------------------------------
# physical density

def pullback_initial_density(ctx: TransformContext, Y_s, profile, x_grid):
    """Normalized x-density ``C profile((y(x, s) - Y_s)/sqrt(eps))``.

    Returns the density grid and the scale ``C``; the matching semiclassical
    Cauchy data is ``C * profile``.
    """
    x_grid = np.asarray(x_grid, float)
    s = ctx.params.s
    xi = (y_of_x(ctx, x_grid, s) - Y_s) / math.sqrt(ctx.params.epsilon)
    raw = np.asarray(profile(xi), float)
    dx = x_grid[1] - x_grid[0]
    mass = float(trapezoid_weights(x_grid.size, dx) @ raw)
    scale = 1.0 / mass
    return DensityGrid(float(x_grid[0]), dx, raw * scale, s), scale


def assemble_values(state: SemiclassicalState, tau, x, ctx=None, include_phi1=True):
    """``phi(xi(x), tau)`` at arbitrary points, ``xi = (y(x, tau) - Y(tau))/sqrt(eps)``.

    ``phi`` is interpolated from the xi grid by cubic splines and is zero
    beyond it.
    """
    ctx = ctx or state.ctx
    if ctx is None:
        raise ParameterError("assembling a density needs a transform context")
    eps = ctx.params.epsilon
    xi = (y_of_x(ctx, np.asarray(x, float), tau) - float(state.at("Y", tau))) / math.sqrt(eps)
    p0, p1 = profiles(state, tau, derivs=(0,))
    phi = p0[0] + (math.sqrt(eps) * p1[0] if include_phi1 else 0.0)
    xg = state.xi_grid
    return _zero_outside(CubicSpline(xg, phi), xg[0], xg[-1])(xi)


def assemble_density(state: SemiclassicalState, tau, x_grid, ctx=None,
                     include_phi1=True, normalize=False) -> DensityGrid:
    """Semiclassical density on the uniform grid ``x_grid``.

    The result is not renormalized unless ``normalize`` is set; its norm
    drift is of order eps.
    """
    x_grid = np.asarray(x_grid, float)
    values = assemble_values(state, tau, x_grid, ctx, include_phi1)
    density = DensityGrid(float(x_grid[0]), float(x_grid[1] - x_grid[0]), values, tau)
    if normalize:
        density = density.with_values(density.values / density.norm())
    return density


# --------------------------------------------------------------------------
# residuals

@dataclass(frozen=True)
class ResidualReport:
    epsilon: float
    residual_norm: float
    solution_norm: float
    ratio: float
    fd_error: float
    tau: float
    include_phi1: bool = True


def _l2(values, xi):
    return math.sqrt(float(trapezoid_weights(xi.size, xi[1] - xi[0]) @ (values * values)))


class _Stencil:
    """Profiles at ``tau + j*d`` for the 4th-order time derivative at two step sizes."""

    def __init__(self, state, tau, dtau):
        if tau - 2 * dtau <= state.s:
            raise ResolutionError("time stencil reaches the initial time; reduce dtau")
        self.center = profiles(state, tau)
        self.dtau = dtau
        self.off = {}
        for j in (-2, -1, -0.5, -0.25, 0.25, 0.5, 1, 2):
            self.off[j] = profiles(state, tau + j * dtau, derivs=(0,))

    def time_derivative(self, which=(1.0, 0.0)):
        """4th-order d/dt of ``which[0]*phi0 + which[1]*phi1`` at steps d/4 and d."""
        def value(j):
            p0, p1 = self.off[j]
            return which[0] * p0[0] + which[1] * p1[0]
        d = self.dtau
        fine = (value(-0.5) - 8 * value(-0.25) + 8 * value(0.25) - value(0.5)) / (3 * d)
        coarse = (value(-2) - 8 * value(-1) + 8 * value(1) - value(2)) / (12 * d)
        return fine, coarse


def residual(state: SemiclassicalState, tau, epsilon, include_phi1=True, dtau=0.02,
             ctx=None, check=True) -> ResidualReport:
    """Residual ``L(phi0 + sqrt(eps) phi1)`` of the full xi-equation at ``tau``.

    The drift ``(Y' + q/A+)/sqrt(eps)`` uses the full-eps ``q``; xi-derivatives
    are analytic and the time derivative is a 4th-order central difference
    with step ``dtau/4``; its error is bounded conservatively by comparing
    with the same stencil at step ``dtau``.
    """
    ctx = ctx or state.ctx
    if ctx is None:
        raise ParameterError("the full residual needs a transform context")
    stencil = _Stencil(state, tau, dtau)
    p0, p1 = stencil.center
    w1 = math.sqrt(epsilon) if include_phi1 else 0.0
    phi = {k: p0[k] + w1 * p1[k] for k in (0, 1, 2)}
    d_fine, d_coarse = stencil.time_derivative(which=(1.0, w1))
    xi = state.xi_grid
    Y = float(state.at("Y", tau))
    y_dot = -float(drift_zero(ctx, Y, tau))
    rt = math.sqrt(epsilon)
    drift = (y_dot + drift_full(ctx, Y + rt * xi, tau, epsilon)) / rt
    g2 = -d_fine + state.alpha * phi[0] + drift * phi[1] + phi[2]
    res_norm = _l2(g2, xi)
    fd_error = _l2(d_fine - d_coarse, xi) / 15.0
    if check and fd_error > 0.1 * res_norm:
        raise ResolutionError(
            f"time-stencil error {fd_error:.2e} exceeds 10% of the residual {res_norm:.2e}")
    sol_norm = _l2(phi[0], xi)
    return ResidualReport(epsilon=epsilon, residual_norm=res_norm, solution_norm=sol_norm,
                          ratio=res_norm / sol_norm, fd_error=fd_error, tau=float(tau),
                          include_phi1=include_phi1)


def order_residuals(state: SemiclassicalState, tau, dtau=0.02):
    """Discrete residuals of ``L0 phi0 = 0`` and ``L0 phi1 + L1 phi0 = 0`` (L2 in xi)."""
    stencil = _Stencil(state, tau, dtau)
    p0, p1 = stencil.center
    xi = state.xi_grid
    R = float(state.at("R", tau))
    Q0 = float(state.at("Q0", tau))
    Q1 = float(state.at("Q1", tau))
    d0, _ = stencil.time_derivative(which=(1.0, 0.0))
    d1, _ = stencil.time_derivative(which=(0.0, 1.0))
    r0 = -d0 + p0[2] + xi * R * p0[1] + state.alpha * p0[0]
    r1 = -d1 + p1[2] + xi * R * p1[1] + state.alpha * p1[0] + (Q0 * xi ** 2 + Q1) * p0[1]
    return _l2(r0, xi), _l2(r1, xi)
