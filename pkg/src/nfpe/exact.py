"""Closed-form evolution operators.

* constant diffusion: Ornstein-Uhlenbeck kernel shifted by the first moment;
* quadratic diffusion under the solvability constraints: heat kernel in the
  transformed coordinate, pulled back to x.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import log_ndtr, ndtr

from .errors import DomainError, ParameterError, TruncationError
from .grid import DensityGrid
from .model import CoefficientSet, ModelParams, check_exact_solvability
from .moments import QUAD_ATOL, moment_const_diffusion
from .quadrature import adaptive_gauss_legendre, chunked_rows, window_rule
from .transform import TransformContext, jacobian_dy_dx, x_of_y, y_of_x

TRUNCATION_TOL = 1e-6


def _ou_variance(alpha, eps, dt):
    return (eps / alpha) * -math.expm1(-2.0 * alpha * dt)


def green_lin(params: ModelParams, tau, s, x, y):
    """Green function of the linear (kappa = 0) constant-diffusion equation."""
    dt = tau - s
    if not dt > 0:
        raise DomainError("G_lin needs tau > s; at tau = s it is a delta distribution")
    alpha, eps = params.alpha, params.epsilon
    var = _ou_variance(alpha, eps, dt)
    mean = math.exp(-alpha * dt) * np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * (x - mean) ** 2 / var) / math.sqrt(2.0 * math.pi * var)


def _source(gamma: DensityGrid, profile: Optional[Callable]):
    return profile if profile is not None else gamma.interpolator()


def _report_truncation(mass, tol, on_truncation):
    if mass <= tol or on_truncation == "ignore":
        return
    message = f"estimated mass outside the output grid {mass:.3e} exceeds {tol:.1e}"
    if on_truncation == "error":
        raise TruncationError(message)
    warnings.warn(message, RuntimeWarning, stacklevel=3)


def _output_grid(gamma: DensityGrid, x_out):
    if x_out is None:
        return gamma.x0, gamma.dx, gamma.x
    x_out = np.asarray(x_out, dtype=float)
    return float(x_out[0]), float(x_out[1] - x_out[0]), x_out


def evolve_const_diffusion(params: ModelParams, gamma: DensityGrid, tau: float,
                           x_out=None, profile=None, X_gamma=None,
                           on_truncation: str = "warn", tol=TRUNCATION_TOL,
                           order: int = 8, resolution_cells: float = 4.0):
    """Apply the nonlinear constant-diffusion evolution operator to ``gamma``.

    ``u(x, tau) = int G_lin(tau, s, x - X_u(tau), y - X_gamma) gamma(y) dy``,
    evaluated with Gauss-Legendre panels adapted to the kernel width.

    Parameters
    ----------
    gamma : DensityGrid
        Initial density at ``params.s``; its trapezoid first moment is used
        as ``X_gamma`` unless given explicitly.
    x_out : array, optional
        Uniform output grid, defaults to the input grid.
    profile : callable, optional
        Exact initial density, used instead of the spline through ``gamma``.
    on_truncation : {"warn", "error", "ignore"}
        Reaction to more than ``tol`` mass falling outside the output grid.
    """
    s = params.s
    dt = tau - s
    if dt < 0:
        raise DomainError(f"tau = {tau} precedes the initial time s = {s}")
    x0, dx, x = _output_grid(gamma, x_out)
    src = _source(gamma, profile)
    if dt == 0:
        values = gamma.values if x_out is None else src(x)
        return DensityGrid(x0, dx, np.array(values, dtype=float), tau)
    if X_gamma is None:
        X_gamma = gamma.moment(1)
    alpha, eps = params.alpha, params.epsilon
    X_u = moment_const_diffusion(params, X_gamma, tau)
    decay = math.exp(-alpha * dt)
    var = _ou_variance(alpha, eps, dt)
    # Kernel as a Gaussian in y: centre X_gamma + (x - X_u)/decay, width sqrt(var)/decay.
    centers = X_gamma + (x - X_u) / decay
    sigma_y = math.sqrt(var) / decay
    nodes, weights = window_rule(centers, sigma_y, gamma.x0, gamma.x_end,
                                 resolution_cells * gamma.dx, order=order)
    values = np.empty(x.size)
    norm = 1.0 / math.sqrt(2.0 * math.pi * var)
    for rows in chunked_rows(x.size, nodes.shape[1]):
        yn = nodes[rows]
        mean = X_u + decay * (yn - X_gamma)
        kern = norm * np.exp(-0.5 * (x[rows, None] - mean) ** 2 / var)
        values[rows] = (kern * src(yn) * weights[rows]).sum(axis=1)
    out = DensityGrid(x0, dx, values, tau)

    # exact Gaussian tail mass: the kernel is normal in x for every source point
    mu = X_u + decay * (gamma.x - X_gamma)
    sd = math.sqrt(var)
    tails = ndtr((x[0] - mu) / sd) + ndtr((mu - x[-1]) / sd)
    _report_truncation(gamma.integrate(gamma.values * tails), tol, on_truncation)
    return out


@dataclass(frozen=True)
class ExactKernelParams:
    """Data of the exactly solvable quadratic-diffusion case.

    ``beta`` is the explicit mean-field function entering ``g``; it defaults
    to zero.
    """

    params: ModelParams
    f_s: float
    g_s: float
    beta: Callable = field(default=lambda t: np.zeros_like(np.asarray(t, float)))

    def __post_init__(self):
        if self.params.a == 0:
            raise ParameterError("quadratic kernel needs a != 0")
        if self.f_s < 0:
            raise ParameterError("f(s) must be >= 0")

    @property
    def s(self):
        return self.params.s

    @property
    def c(self):
        return self.params.c

    def f(self, tau):
        p = self.params
        return self.f_s * np.exp(-2.0 * p.a * self.c * (np.asarray(tau, float) - p.s))

    def f_dot(self, tau):
        return -2.0 * self.params.a * self.c * self.f(tau)


def exact_coeffs(kernel: ExactKernelParams, beta=None, tau=None):
    """``f(tau)`` and ``g(tau)`` solving the solvability constraints.

    ``g = g(s) e^{-alpha(tau-s)} + a kappa int_s^tau e^{-alpha(tau-xi)} beta(xi) dxi``
    with the integral done by adaptive Gauss-Legendre to 1e-10.
    """
    p = kernel.params
    if tau < p.s:
        raise DomainError(f"tau = {tau} precedes the initial time s = {p.s}")
    beta = kernel.beta if beta is None else beta
    f = float(kernel.f(tau))
    g = kernel.g_s * math.exp(-p.alpha * (tau - p.s))
    if p.kappa != 0 and tau > p.s:
        g += p.a * p.kappa * adaptive_gauss_legendre(
            lambda xi: np.exp(-p.alpha * (tau - xi)) * beta(xi), p.s, tau, atol=QUAD_ATOL)
    return f, g


def _expm_2x2(m, t):
    """``exp(M t)`` for a real 2x2 matrix with real eigenvalues, vectorized in t."""
    t = np.asarray(t, dtype=float)
    half_trace = 0.5 * (m[0, 0] + m[1, 1])
    disc = 0.25 * (m[0, 0] - m[1, 1]) ** 2 + m[0, 1] * m[1, 0]
    if disc < 0:
        raise ParameterError("moment/g system has complex eigenvalues")
    d = math.sqrt(disc)
    scale = np.exp(half_trace * t)
    cosh = np.cosh(d * t)
    sinhc = np.sinh(d * t) / d if d > 0 else t
    shifted = m - half_trace * np.eye(2)
    return scale[..., None, None] * (cosh[..., None, None] * np.eye(2)
                                    + sinhc[..., None, None] * shifted)


def solvable_configuration(params: ModelParams, f_s: float, g_s: float, X_gamma: float):
    """Coefficients of an exactly solvable run with a self-consistent mean field.

    With ``beta = X_u`` the moment ODE and the g constraint form the linear
    system ``d/dt (X, g) = M (X, g)``, solved here by its matrix exponential.

    Returns
    -------
    kernel : ExactKernelParams
        ``beta`` is the closed-form moment ``X_u``.
    coeffs : CoefficientSet
        f, g, beta in closed form with exact derivatives.
    """
    a, eps, alpha, kappa, s = params.a, params.epsilon, params.alpha, params.kappa, params.s
    m = np.array([[-(alpha + kappa - 2.0 * a * a * eps), 2.0 * a * eps],
                  [a * kappa, -alpha]])
    state0 = np.array([X_gamma, g_s], dtype=float)

    def state(t):
        return _expm_2x2(m, np.asarray(t, float) - s) @ state0

    def moment(t):
        return state(t)[..., 0]

    def g(t):
        return state(t)[..., 1]

    def g_dot(t):
        return (state(t) @ m.T)[..., 1]

    kernel = ExactKernelParams(params=params, f_s=f_s, g_s=g_s, beta=moment)
    coeffs = CoefficientSet(f=kernel.f, f_dot=kernel.f_dot, g=g, g_dot=g_dot, beta=moment)
    return kernel, coeffs


def _context(kernel: ExactKernelParams, coeffs: Optional[CoefficientSet]):
    if coeffs is None:
        coeffs = _kernel_coeffs(kernel)
    return TransformContext(kernel.params, coeffs), coeffs


def _kernel_coeffs(kernel: ExactKernelParams):
    def g(t):
        t_arr = np.atleast_1d(np.asarray(t, float))
        vals = np.array([exact_coeffs(kernel, tau=float(ti))[1] for ti in t_arr])
        return vals if np.ndim(t) else float(vals[0])

    def g_dot(t):
        p = kernel.params
        return -p.alpha * g(t) + p.a * p.kappa * kernel.beta(t)
    return CoefficientSet(f=kernel.f, f_dot=kernel.f_dot, g=g, g_dot=g_dot, beta=kernel.beta)


def green_quadratic(kernel: ExactKernelParams, coeffs: Optional[CoefficientSet],
                    tau, s, x, xp):
    """Exact kernel ``G(tau, s, x, x')`` of the quadratic-diffusion equation."""
    dt = tau - s
    if not dt > 0:
        raise DomainError("the quadratic kernel needs tau > s")
    ctx, _ = _context(kernel, coeffs)
    p = kernel.params
    arg = y_of_x(ctx, x, tau) - y_of_x(ctx, xp, s) + p.c * dt
    return (math.exp(p.alpha * dt) / math.sqrt(4.0 * math.pi * p.epsilon * dt)
            * np.exp(-arg ** 2 / (4.0 * p.epsilon * dt)))


def _quadratic_tail_mass(ctx, gamma, tau, s, dt, y_lo, y_hi):
    """Mass of the exact solution outside ``[y_lo, y_hi]`` (transformed x-grid ends)."""
    p = ctx.params
    a, c, eps = p.a, p.c, p.epsilon
    f_tau = float(ctx.coeffs.f(tau))
    v = 2.0 * eps * dt
    sd = math.sqrt(v)
    m = y_of_x(ctx, gamma.x, s) - c * dt
    log_pre = p.alpha * dt + 0.5 * a * a * v - math.log(2.0)

    def side(bound, upper):
        sign = 1.0 if upper else -1.0
        # int over y beyond bound of N(y; m, v) (e^{a y} + f e^{-a y})
        t_pos = sign * (bound - m - a * v) / sd
        t_neg = sign * (bound - m + a * v) / sd
        val = np.exp(log_pre + a * m + log_ndtr(-t_pos))
        if f_tau > 0:
            val = val + np.exp(log_pre + math.log(f_tau) - a * m + log_ndtr(-t_neg))
        return val
    tails = side(y_hi, True) + side(y_lo, False)
    return gamma.integrate(gamma.values * tails * jacobian_dy_dx(ctx, gamma.x, s))


def evolve_quadratic(kernel: ExactKernelParams, gamma: DensityGrid, tau: float,
                     coeffs: Optional[CoefficientSet] = None, x_out=None, profile=None,
                     jacobian: str = "initial", on_truncation: str = "warn",
                     tol=TRUNCATION_TOL, check_tol: float = 1e-8, order: int = 8,
                     resolution_cells: float = 4.0):
    """Exact evolution for quadratic diffusion under the solvability constraints.

    The quadrature runs in the transformed variable ``y' = y(x', s)``, where
    ``dx'/sqrt(f(s) + (a x' + g(s))^2) = dy'``.

    Parameters
    ----------
    coeffs : CoefficientSet, optional
        Coefficients consistent with ``kernel``; by default rebuilt from the
        kernel (g from its quadrature formula). Constraints are verified.
    jacobian : {"initial", "final"}
        Coefficients paired with x' in the Jacobian factor: (f(s), g(s))
        or (f(tau), g(tau)).
    """
    p = kernel.params
    s = p.s
    dt = tau - s
    if dt < 0:
        raise DomainError(f"tau = {tau} precedes the initial time s = {s}")
    if jacobian not in ("initial", "final"):
        raise ParameterError("jacobian must be 'initial' or 'final'")
    ctx, coeffs = _context(kernel, coeffs)
    x0, dx, x = _output_grid(gamma, x_out)
    src = _source(gamma, profile)
    if dt == 0:
        values = gamma.values if x_out is None else src(x)
        return DensityGrid(x0, dx, np.array(values, dtype=float), tau)
    ok, res = check_exact_solvability(p, coeffs, np.linspace(s, tau, 9), tol=check_tol)
    if not ok:
        raise ParameterError(f"solvability constraints violated (residual {res:.2e})")

    eps, c = p.epsilon, p.c
    sigma = math.sqrt(2.0 * eps * dt)
    centers = y_of_x(ctx, x, tau) + c * dt
    y_lo, y_hi = y_of_x(ctx, np.array([gamma.x0, gamma.x_end]), s)
    dy_cell = gamma.dx * float(np.min(jacobian_dy_dx(ctx, gamma.x, s)))
    nodes, weights = window_rule(centers, sigma, y_lo, y_hi,
                                 resolution_cells * dy_cell, order=order)
    lead = math.exp(p.alpha * dt) / math.sqrt(2.0 * math.pi * sigma ** 2)
    values = np.empty(x.size)
    for rows in chunked_rows(x.size, nodes.shape[1]):
        yn = nodes[rows]
        xp = x_of_y(ctx, yn, s)
        kern = lead * np.exp(-0.5 * (yn - centers[rows, None]) ** 2 / sigma ** 2)
        integrand = kern * src(xp)
        if jacobian == "final":
            integrand = integrand * jacobian_dy_dx(ctx, xp, tau) / jacobian_dy_dx(ctx, xp, s)
        values[rows] = (integrand * weights[rows]).sum(axis=1)
    out = DensityGrid(x0, dx, values, tau)
    y_out = y_of_x(ctx, np.array([x[0], x[-1]]), tau)
    _report_truncation(_quadratic_tail_mass(ctx, gamma, tau, s, dt, *y_out),
                       tol, on_truncation)
    return out
