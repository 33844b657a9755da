"""Model parameters and time-dependent coefficients of the mean-field FPE.

The equation handled throughout the package is

    u_t = d/dx[(alpha x + kappa beta(t)) u] + eps d/dx[(f(t) + (a x + g(t))^2) u_x]

with ``beta(t)`` either an explicit function or the first moment of ``u``
itself (the self-consistent mean field).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np

from .errors import ParameterError

FD_STEP = 1e-5

SELF_CONSISTENT = "self-consistent"

TimeFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ModelParams:
    """Scalar parameters of the equation.

    Parameters
    ----------
    alpha : float
        Linear drift rate, > 0.
    kappa : float
        Mean-field coupling, >= 0.
    a : float
        Shape parameter of the quadratic diffusion.
    epsilon : float
        Diffusion scale, also the semiclassical small parameter, > 0.
    s : float
        Initial (logarithmic) time.
    """

    alpha: float
    kappa: float = 0.0
    a: float = 0.0
    epsilon: float = 1.0
    s: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "kappa", "a", "epsilon", "s"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.alpha <= 0:
            raise ParameterError(f"alpha must be > 0, got {self.alpha}")
        if self.epsilon <= 0:
            raise ParameterError(f"epsilon must be > 0, got {self.epsilon}")
        if self.kappa < 0:
            raise ParameterError(f"kappa must be >= 0, got {self.kappa}")

    @property
    def c(self) -> float:
        """Drift speed alpha/a + a*eps of the exactly solvable reduction."""
        if self.a == 0:
            raise ParameterError("c = alpha/a + a*eps is undefined for a = 0")
        return self.alpha / self.a + self.a * self.epsilon

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


def _const(value: float) -> TimeFunction:
    def fn(t):
        return np.full_like(np.asarray(t, dtype=float), value) + 0.0
    return fn


def exp_decay(amplitude: float, rate: float, t0: float = 0.0):
    """Return ``(fn, derivative)`` for ``amplitude * exp(-rate (t - t0))``."""
    def fn(t):
        return amplitude * np.exp(-rate * (np.asarray(t, dtype=float) - t0))

    def dfn(t):
        return -rate * fn(t)
    return fn, dfn


def central_difference(fn: TimeFunction, step: float = FD_STEP) -> TimeFunction:
    """Central finite-difference derivative, used when no closed form is given."""
    def dfn(t):
        t = np.asarray(t, dtype=float)
        return (fn(t + step) - fn(t - step)) / (2.0 * step)
    return dfn


@dataclass(frozen=True)
class CoefficientSet:
    """Coefficients f, g, beta and the derivatives of f and g.

    ``beta`` is a callable or the string :data:`SELF_CONSISTENT`, meaning
    ``beta(t)`` is the first moment of the solution. ``approximate`` is set
    when a derivative came from the finite-difference fallback.
    """

    f: TimeFunction
    f_dot: TimeFunction
    g: TimeFunction
    g_dot: TimeFunction
    beta: Union[TimeFunction, str] = field(default_factory=lambda: _const(0.0))
    approximate: bool = False

    @classmethod
    def from_functions(cls, f, g, beta=0.0, f_dot=None, g_dot=None,
                       check_times=None) -> "CoefficientSet":
        """Build a coefficient set from callables or constants.

        Missing derivatives fall back to central differences (step 1e-5) and
        mark the set as approximate. Supplied derivatives are checked against
        central differences on ``check_times``.
        """
        approximate = False
        if not callable(f):
            f_value = float(f)
            f, f_dot = _const(f_value), (f_dot or _const(0.0))
        if not callable(g):
            g_value = float(g)
            g, g_dot = _const(g_value), (g_dot or _const(0.0))
        if f_dot is None:
            f_dot, approximate = central_difference(f), True
        if g_dot is None:
            g_dot, approximate = central_difference(g), True
        if beta != SELF_CONSISTENT and not callable(beta):
            beta = _const(float(beta))
        coeffs = cls(f=f, f_dot=f_dot, g=g, g_dot=g_dot, beta=beta,
                     approximate=approximate)
        if check_times is not None:
            coeffs.validate(check_times)
        return coeffs

    @classmethod
    def constant(cls, f=0.0, g=0.0, beta=0.0) -> "CoefficientSet":
        return cls.from_functions(f, g, beta)

    @property
    def self_consistent(self) -> bool:
        return isinstance(self.beta, str) and self.beta == SELF_CONSISTENT

    def with_beta(self, beta) -> "CoefficientSet":
        """Replace beta, e.g. by a moment trajectory resolving the mean field."""
        if beta != SELF_CONSISTENT and not callable(beta):
            beta = _const(float(beta))
        return replace(self, beta=beta)

    def beta_at(self, t):
        if self.self_consistent:
            raise ParameterError(
                "beta is self-consistent; resolve it with a moment trajectory first")
        return self.beta(t)

    def validate(self, times, rtol: float = 1e-6) -> None:
        """Check f >= 0 and derivative consistency on the sample ``times``."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        fv = np.asarray(self.f(times), dtype=float)
        if np.any(fv < 0):
            bad = times[np.argmax(fv < 0)]
            raise ParameterError(f"f(t) must be >= 0; f({bad:g}) = {self.f(bad):g}")
        for name, fn, dfn in (("f", self.f, self.f_dot), ("g", self.g, self.g_dot)):
            exact = np.asarray(dfn(times), dtype=float)
            approx = central_difference(fn)(times)
            scale = np.maximum(np.abs(exact), 1e-3 * np.maximum(np.abs(fn(times)), 1.0))
            if np.any(np.abs(exact - approx) > rtol * scale + 1e-12):
                raise ParameterError(
                    f"{name}_dot disagrees with central differences of {name}")


def map_empirical_coefficients(b0: float, decay: float, quad: float, shift: float,
                               epsilon: Optional[float] = None):
    """Map ``b0 exp(-decay t) + quad (x + shift)^2`` onto ``eps (f + (a x + g)^2)``.

    Only ``eps*f`` and ``eps*a^2`` are determined by the empirical form; by
    default ``epsilon = quad`` so that ``a = 1``.

    Returns
    -------
    partial : dict
        ``{"a": a, "epsilon": epsilon}``, to be completed into a ModelParams.
    coeffs : CoefficientSet
        ``f(t) = (b0/eps) exp(-decay t)``, ``g = shift * a``, ``beta = 0``.
    """
    if not quad > 0:
        raise ParameterError(f"quad must be > 0, got {quad}")
    if epsilon is None:
        epsilon = quad
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    if b0 < 0:
        raise ParameterError(f"b0 must be >= 0 so that f >= 0, got {b0}")
    a = math.sqrt(quad / epsilon)
    f, f_dot = exp_decay(b0 / epsilon, decay)
    g_value = shift * a
    coeffs = CoefficientSet.from_functions(f, g_value, 0.0, f_dot=f_dot)
    return {"a": a, "epsilon": epsilon}, coeffs


def diffusion_coefficient(params: ModelParams, coeffs: CoefficientSet, x, t):
    """Physical diffusion ``eps (f(t) + (a x + g(t))^2)``."""
    x = np.asarray(x, dtype=float)
    return params.epsilon * (coeffs.f(t) + (params.a * x + coeffs.g(t)) ** 2)


def check_exact_solvability(params: ModelParams, coeffs: CoefficientSet, times,
                            tol: float = 1e-10):
    """Test the constraints ``f' + 2acf = 0`` and ``g' + alpha g - a kappa beta = 0``.

    Returns
    -------
    (ok, max_residual)
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0:
        raise ParameterError("empty sample set")
    c = params.c
    a = params.a
    r_f = coeffs.f_dot(times) + 2 * a * c * coeffs.f(times)
    r_g = (coeffs.g_dot(times) + params.alpha * coeffs.g(times)
           - a * params.kappa * coeffs.beta_at(times))
    residual = float(max(np.max(np.abs(r_f)), np.max(np.abs(r_g))))
    return residual <= tol, residual
