"""Logarithmic change of variables that makes the quadratic diffusion constant.

    y = (1/a) log(a x + g + sqrt(f + (a x + g)^2))

together with its inverse, its Jacobian and the drift algebra (q, A+-) of
the transformed equation ``u_t = alpha u + (q/A+) u_y + eps u_yy``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError
from .model import CoefficientSet, ModelParams


@dataclass(frozen=True)
class TransformContext:
    params: ModelParams
    coeffs: CoefficientSet

    def __post_init__(self):
        if self.params.a == 0:
            raise ParameterError(
                "the logarithmic transform needs a != 0; use the constant-diffusion path")

    @property
    def a(self):
        return self.params.a

    def fg(self, tau):
        return float(self.coeffs.f(tau)), float(self.coeffs.g(tau))


def y_of_x(ctx: TransformContext, x, tau):
    """Transformed coordinate, evaluated as (1/a)[asinh(w/sqrt f) + log(f)/2]."""
    a = ctx.a
    f, g = ctx.fg(tau)
    w = a * np.asarray(x, dtype=float) + g
    if f > 0:
        return (np.arcsinh(w / np.sqrt(f)) + 0.5 * np.log(f)) / a
    if np.any(w <= 0):
        raise DomainError("f = 0 requires a x + g > 0 for every point")
    return np.log(2.0 * w) / a


def A_plus_minus(ctx: TransformContext, y, tau):
    """``A+- = exp(a y) +- f exp(-a y)``."""
    a = ctx.a
    f = float(ctx.coeffs.f(tau))
    y = np.asarray(y, dtype=float)
    e_pos = np.exp(a * y)
    e_neg = f * np.exp(-a * y)
    return e_pos + e_neg, e_pos - e_neg


def x_of_y(ctx: TransformContext, y, tau):
    """Inverse transform ``(A-(y)/2 - g)/a``."""
    _, a_minus = A_plus_minus(ctx, y, tau)
    g = float(ctx.coeffs.g(tau))
    return (0.5 * a_minus - g) / ctx.a


def jacobian_dy_dx(ctx: TransformContext, x, tau):
    """``dy/dx = 1/sqrt(f + (a x + g)^2)``."""
    f, g = ctx.fg(tau)
    w = ctx.a * np.asarray(x, dtype=float) + g
    d2 = f + w * w
    if np.any(d2 <= 0):
        raise DomainError("Jacobian is singular where f = 0 and a x + g = 0")
    if f == 0 and np.any(w < 0):
        raise DomainError("f = 0 requires a x + g > 0 for every point")
    return 1.0 / np.sqrt(d2)


def _q_constant_part(ctx: TransformContext, tau):
    p, c = ctx.params, ctx.coeffs
    beta = float(c.beta_at(tau))
    return 2.0 * (p.kappa * beta - (p.alpha / p.a) * float(c.g(tau))
                  - float(c.g_dot(tau)) / p.a)


def q_full(ctx: TransformContext, y, tau, epsilon=None):
    """Drift numerator ``q(y, t, eps)`` of the transformed equation."""
    p = ctx.params
    eps = p.epsilon if epsilon is None else epsilon
    y = np.asarray(y, dtype=float)
    _, a_minus = A_plus_minus(ctx, y, tau)
    f_dot = float(ctx.coeffs.f_dot(tau))
    return (_q_constant_part(ctx, tau) - (f_dot / p.a) * np.exp(-p.a * y)
            + (p.alpha / p.a + p.a * eps) * a_minus)


def q_zero(ctx: TransformContext, y, tau):
    """``q`` at eps = 0."""
    return q_full(ctx, y, tau, epsilon=0.0)


def drift_zero(ctx: TransformContext, y, tau):
    """Leading drift ``q0/A+`` of the transformed equation."""
    a_plus, _ = A_plus_minus(ctx, y, tau)
    return q_zero(ctx, y, tau) / a_plus


def drift_full(ctx: TransformContext, y, tau, epsilon=None):
    a_plus, _ = A_plus_minus(ctx, y, tau)
    return q_full(ctx, y, tau, epsilon) / a_plus
