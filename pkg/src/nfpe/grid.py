"""Sampled probability densities on uniform grids."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ParameterError


def trapezoid_weights(n: int, dx: float) -> np.ndarray:
    w = np.full(n, dx)
    w[0] = w[-1] = 0.5 * dx
    return w


@dataclass(frozen=True)
class DensityGrid:
    """Density samples ``values[i] = u(x0 + i*dx)`` at time ``tau``."""

    x0: float
    dx: float
    values: np.ndarray
    tau: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 3:
            raise ParameterError("density grid needs a 1D array of >= 3 samples")
        if not self.dx > 0:
            raise ParameterError(f"grid spacing must be > 0, got {self.dx}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, fn, x_min, x_max, n, tau=0.0) -> "DensityGrid":
        x = np.linspace(x_min, x_max, n)
        return cls(x0=float(x_min), dx=(x_max - x_min) / (n - 1),
                   values=np.asarray(fn(x), dtype=float), tau=tau)

    @classmethod
    def gaussian(cls, mean, var, x_min, x_max, n, tau=0.0) -> "DensityGrid":
        return cls.from_function(
            lambda x: np.exp(-0.5 * (x - mean) ** 2 / var) / np.sqrt(2 * np.pi * var),
            x_min, x_max, n, tau)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    @property
    def x_end(self) -> float:
        return self.x0 + self.dx * (self.n - 1)

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.n, self.dx)

    def with_values(self, values, tau=None) -> "DensityGrid":
        return DensityGrid(self.x0, self.dx, values, self.tau if tau is None else tau)

    def same_grid(self, other: "DensityGrid", rtol=1e-12) -> bool:
        return (self.n == other.n
                and abs(self.x0 - other.x0) <= rtol * max(1.0, abs(self.x0))
                and abs(self.dx - other.dx) <= rtol * self.dx)

    def integrate(self, values=None) -> float:
        v = self.values if values is None else values
        return float(np.dot(self.weights, v))

    def norm(self) -> float:
        return self.integrate()

    def moment(self, k: int, center: float = 0.0) -> float:
        return self.integrate((self.x - center) ** k * self.values)

    def mean(self) -> float:
        return self.moment(1) / self.norm()

    def variance(self) -> float:
        m = self.mean()
        return self.moment(2, m) / self.norm()

    def excess_kurtosis(self) -> float:
        m = self.mean()
        var = self.moment(2, m) / self.norm()
        return self.moment(4, m) / self.norm() / var ** 2 - 3.0

    def edge_mass(self, cells: int = 1) -> float:
        """Mass carried by the outermost ``cells`` samples on both sides."""
        v = np.abs(self.values)
        return float(self.dx * (v[:cells].sum() + v[-cells:].sum()))

    def min_ratio(self) -> float:
        """``min(values)/max(values)``; materially negative densities are < -1e-10."""
        peak = float(np.max(np.abs(self.values)))
        return float(np.min(self.values)) / peak if peak > 0 else 0.0

    def interpolator(self):
        """Cubic spline through the samples, zero outside the grid."""
        spline = CubicSpline(self.x, self.values)
        lo, hi = self.x0, self.x_end

        def fn(x):
            x = np.asarray(x, dtype=float)
            inside = (x >= lo) & (x <= hi)
            return np.where(inside, spline(np.clip(x, lo, hi)), 0.0)
        return fn
