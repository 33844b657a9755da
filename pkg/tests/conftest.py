import math

import numpy as np
import pytest

from nfpe.grid import DensityGrid
from nfpe.model import CoefficientSet, ModelParams, exp_decay

# filled by test_acceptance; one line per criterion in the terminal summary
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def std_normal(x):
    return np.exp(-0.5 * np.asarray(x, float) ** 2) / math.sqrt(2 * math.pi)


@pytest.fixture
def empirical():
    """Mapped empirical coefficients with a self-consistent mean field."""
    params = ModelParams(alpha=0.44, kappa=0.1, a=1.0, epsilon=0.019)
    f, f_dot = exp_decay(0.157895, 0.5)
    coeffs = CoefficientSet.from_functions(f, 0.04, "self-consistent", f_dot=f_dot)
    return params, coeffs


@pytest.fixture
def gaussian_grid():
    def make(mean=0.1, var=0.01, lo=-1.5, hi=1.5, n=2001):
        return DensityGrid.gaussian(mean, var, lo, hi, n)
    return make
