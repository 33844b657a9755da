"""First moment X_u(t) of the solution: closed forms and an RK4 solver.

The moment obeys a linear ODE that does not involve the density itself, so
computing it first turns the mean-field equation into a linear one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import DomainError, ParameterError
from .model import CoefficientSet, ModelParams
from .quadrature import adaptive_gauss_legendre

QUAD_ATOL = 1e-10


def check_time_grid(tau_grid, s=None, rtol=1e-9):
    """Validate a strictly increasing, uniform time grid (optionally starting at s)."""
    tau_grid = np.asarray(tau_grid, dtype=float)
    if tau_grid.ndim != 1 or tau_grid.size < 2:
        raise ParameterError("time grid needs at least two points")
    steps = np.diff(tau_grid)
    if np.any(steps <= 0):
        raise ParameterError("time grid must be strictly increasing")
    if np.max(np.abs(steps - steps[0])) > rtol * max(abs(steps[0]), 1e-300) + 1e-13:
        raise ParameterError("time grid must be uniform")
    if s is not None and abs(tau_grid[0] - s) > 1e-12 * max(1.0, abs(s)):
        raise ParameterError(f"time grid must start at s = {s}, got {tau_grid[0]}")
    return tau_grid


def rk4(rhs, y0, tau_grid, substeps: int = 1):
    """Classical fourth-order Runge-Kutta on a grid; returns values at grid points.

    ``rhs(t, y)`` may be vector valued. ``substeps`` equal sub-steps are taken
    inside each grid interval.
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    y = np.asarray(y0, dtype=float)
    out = np.empty((tau_grid.size,) + y.shape)
    out[0] = y
    for i in range(tau_grid.size - 1):
        t = tau_grid[i]
        h = (tau_grid[i + 1] - t) / substeps
        for _ in range(substeps):
            k1 = rhs(t, y)
            k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = t + h
        out[i + 1] = y
    return out


@dataclass(frozen=True)
class MomentTrajectory:
    """Sampled first moment with cubic Hermite interpolation between samples."""

    tau: np.ndarray
    values: np.ndarray
    rates: np.ndarray
    X_gamma: float
    s: float

    def __post_init__(self):
        object.__setattr__(self, "_spline",
                           CubicHermiteSpline(self.tau, self.values, self.rates))

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        tol = 1e-12 * max(1.0, abs(self.tau[-1]))
        if np.any(t_arr < self.tau[0] - tol) or np.any(t_arr > self.tau[-1] + tol):
            raise DomainError(
                f"moment trajectory defined on [{self.tau[0]:g}, {self.tau[-1]:g}]")
        out = self._spline(np.clip(t_arr, self.tau[0], self.tau[-1]))
        # grid samples are returned exactly, X(s) = X_gamma in particular
        if out.ndim == 0:
            idx = np.searchsorted(self.tau, float(t_arr))
            if idx < self.tau.size and self.tau[idx] == float(t_arr):
                return float(self.values[idx])
            return float(out)
        return out

    def derivative(self, t):
        return self._spline(np.asarray(t, dtype=float), 1)


def moment_const_diffusion(params: ModelParams, X_gamma: float, tau: float) -> float:
    """``X_gamma exp(-(alpha + kappa)(tau - s))`` for constant diffusion."""
    if tau < params.s:
        raise DomainError(f"tau = {tau} precedes the initial time s = {params.s}")
    return X_gamma * math.exp(-(params.alpha + params.kappa) * (tau - params.s))


def _net_rate(params: ModelParams) -> float:
    return params.alpha + params.kappa - 2.0 * params.a ** 2 * params.epsilon


def moment_quadratic_explicit(params: ModelParams, coeffs: CoefficientSet,
                              X_gamma: float, tau: float) -> float:
    """Closed-form moment for quadratic diffusion, ``beta = X_u``, g independent of X_u.

    The source integral of g is computed by adaptive Gauss-Legendre to 1e-10.
    """
    s = params.s
    if tau < s:
        raise DomainError(f"tau = {tau} precedes the initial time s = {s}")
    lam = _net_rate(params)
    homogeneous = math.exp(-lam * (tau - s)) * X_gamma
    if params.a == 0 or tau == s:
        return homogeneous
    integral = adaptive_gauss_legendre(
        lambda xi: np.exp(-lam * (tau - xi)) * coeffs.g(xi), s, tau, atol=QUAD_ATOL)
    return homogeneous + 2.0 * params.a * params.epsilon * integral


def moment_rhs(params: ModelParams, coeffs: CoefficientSet):
    """Right-hand side ``X' = -(alpha - 2a^2 eps) X - kappa beta + 2 a eps g``."""
    alpha, kappa, a, eps = params.alpha, params.kappa, params.a, params.epsilon
    if coeffs.self_consistent:
        lam = alpha + kappa - 2.0 * a * a * eps

        def rhs(t, x):
            return -lam * x + 2.0 * a * eps * coeffs.g(t)
    else:
        lam = alpha - 2.0 * a * a * eps

        def rhs(t, x):
            return -lam * x - kappa * coeffs.beta(t) + 2.0 * a * eps * coeffs.g(t)
    return rhs


def moment_ode_solve(params: ModelParams, coeffs: CoefficientSet, X_gamma: float,
                     tau_grid) -> MomentTrajectory:
    """Integrate the moment ODE with classical RK4 on a uniform grid from s.

    A self-consistent beta is replaced by the running moment itself, which
    keeps the ODE linear in X.
    """
    tau_grid = check_time_grid(tau_grid, params.s)
    rhs = moment_rhs(params, coeffs)
    values = rk4(lambda t, x: float(rhs(t, x)), float(X_gamma), tau_grid)
    rates = np.array([float(rhs(t, x)) for t, x in zip(tau_grid, values)])
    return MomentTrajectory(tau=tau_grid, values=values, rates=rates,
                            X_gamma=float(X_gamma), s=params.s)
