import math

import numpy as np
import pytest

from nfpe.errors import CFLError, ParameterError
from nfpe.exact import solvable_configuration
from nfpe.grid import DensityGrid
from nfpe.model import CoefficientSet, ModelParams
from nfpe.moments import moment_ode_solve
from nfpe.reference import FdConfig, default_config, fd_solve, grid_metrics

SC = "self-consistent"


def test_config_validation():
    with pytest.raises(ParameterError):
        FdConfig(1.0, 0.0, 11, 0.1)
    with pytest.raises(ParameterError):
        FdConfig(0.0, 1.0, 2, 0.1)
    with pytest.raises(ParameterError):
        FdConfig(0.0, 1.0, 11, 0.0)
    with pytest.raises(ParameterError):
        FdConfig(0.0, 1.0, 11, 0.1, scheme="upwind")


def test_explicit_cfl_checked():
    p = ModelParams(alpha=0.44, epsilon=0.003)
    coeffs = CoefficientSet.from_functions(1.0, 0.0, SC)
    gamma = DensityGrid.gaussian(0.0, 0.01, -1, 1, 401)
    with pytest.raises(CFLError):
        fd_solve(p, coeffs, gamma, FdConfig(-1, 1, 401, 1e-2, "explicit"), 0.1)


def test_default_explicit_step():
    p = ModelParams(alpha=0.44, epsilon=0.003)
    coeffs = CoefficientSet.from_functions(1.0, 0.0, 0.0)
    cfg = default_config(p, coeffs, 0.0, 0.1, nx=401, scheme="explicit")
    assert cfg.dt == pytest.approx(cfg.dx ** 2 / (4 * 0.003))
    assert cfg.x_min == pytest.approx(-1.0) and cfg.x_max == pytest.approx(1.0)


@pytest.mark.parametrize("scheme", ["semi-implicit", "explicit"])
def test_ou_variance(scheme):
    p = ModelParams(alpha=0.44, kappa=0.0, epsilon=0.003)
    coeffs = CoefficientSet.from_functions(1.0, 0.0, SC)
    gamma = DensityGrid.gaussian(0.0, 0.01, -1, 1, 2001)
    cfg = default_config(p, coeffs.with_beta(0.0), 0.0, 0.1, nx=2001, scheme=scheme)
    u = fd_solve(p, coeffs, gamma, cfg, 1.0)[0]
    var = 0.01 * math.exp(-0.88) + 0.003 / 0.44 * (1 - math.exp(-0.88))
    assert u.variance() == pytest.approx(var, abs=1e-4)
    assert u.variance() == pytest.approx(var, abs=1e-6)


def test_stationary_start():
    p = ModelParams(alpha=0.44, kappa=0.0, epsilon=0.003)
    coeffs = CoefficientSet.from_functions(1.0, 0.0, SC)
    var = 0.003 / 0.44
    gamma = DensityGrid.gaussian(0.0, var, -10 * math.sqrt(var), 10 * math.sqrt(var), 2001)
    u = fd_solve(p, coeffs, gamma, FdConfig(gamma.x0, gamma.x_end, 2001, 1e-3), 1.0)[0]
    assert grid_metrics(u, gamma).l1 < 1e-5


def test_moment_matches_ode(empirical):
    p, coeffs = empirical
    gamma = DensityGrid.gaussian(0.1, 0.01, -1.5, 1.5, 2001)
    res = fd_solve(p, coeffs, gamma, FdConfig(-1.5, 1.5, 2001, 1e-3), 1.0, times=[0.5, 1.0])
    traj = moment_ode_solve(p, coeffs, gamma.moment(1), np.linspace(0, 1, 1001))
    for u in res.densities:
        assert u.moment(1) == pytest.approx(traj(u.tau), rel=1e-3)


def test_conservation_and_positivity(empirical):
    p, coeffs = empirical
    gamma = DensityGrid.gaussian(0.1, 0.01, -1.5, 1.5, 1001)
    res = fd_solve(p, coeffs, gamma, FdConfig(-1.5, 1.5, 1001, 1e-3), 1.0)
    assert res.norm_drift < 1e-12
    assert res.min_value > -1e-8
    assert res.edge_mass < 1e-10


def test_feedback_agrees_with_precomputed(empirical):
    p, coeffs = empirical
    gamma = DensityGrid.gaussian(0.1, 0.01, -1.5, 1.5, 1001)
    cfg = FdConfig(-1.5, 1.5, 1001, 1e-3)
    a = fd_solve(p, coeffs, gamma, cfg, 1.0)[0]
    b = fd_solve(p, coeffs, gamma, cfg, 1.0, feedback=True)[0]
    assert grid_metrics(a, b).l1 < 1e-6


def test_second_order_convergence():
    p = ModelParams(alpha=0.44, kappa=0.1, a=1.0, epsilon=0.019)
    coeffs = CoefficientSet.from_functions(0.5, 0.0, SC)
    sols = []
    for nx in (301, 601, 1201):
        gamma = DensityGrid.gaussian(0.1, 0.01, -1.5, 1.5, nx)
        sols.append(fd_solve(p, coeffs, gamma, FdConfig(-1.5, 1.5, nx, 2.5e-3), 0.5)[0])
    fine = sols[-1]
    errs = []
    for u in sols[:2]:
        stride = (fine.n - 1) // (u.n - 1)
        errs.append(u.integrate(np.abs(u.values - fine.values[::stride])))
    # Richardson: e(h) - e(h/2) against the finest solution, leading term ratio 4 -> (1-1/16)/(1/4-1/16)
    assert 3.0 <= errs[0] / errs[1] <= 6.0


def test_output_times_must_be_on_grid(empirical):
    p, coeffs = empirical
    gamma = DensityGrid.gaussian(0.1, 0.01, -1.5, 1.5, 201)
    with pytest.raises(ParameterError):
        fd_solve(p, coeffs, gamma, FdConfig(-1.5, 1.5, 201, 0.1), 1.0, times=[0.55])


def test_against_exact_kernel():
    from nfpe.exact import evolve_quadratic
    p = ModelParams(alpha=0.44, kappa=0.1, a=1.0, epsilon=0.019)
    kernel, coeffs = solvable_configuration(p, 0.157895, 0.04, 0.1)
    gamma = DensityGrid.gaussian(0.1, 0.01, -1.5, 1.5, 1001)
    u = fd_solve(p, coeffs.with_beta(SC), gamma, FdConfig(-1.5, 1.5, 1001, 1e-3), 1.0)[0]
    assert grid_metrics(u, evolve_quadratic(kernel, gamma, 1.0, coeffs=coeffs)).l1 < 2e-4


def test_grid_metrics_examples():
    u = DensityGrid.gaussian(0.0, 0.01, -1, 1, 2001)
    m = grid_metrics(u, u)
    assert m == (0.0, 0.0, 0.0, 0.0)
    zero = grid_metrics(u, u.with_values(np.zeros(u.n)))
    assert zero.l1 == pytest.approx(1.0, abs=1e-12)
    delta = 1e-3
    v = DensityGrid.gaussian(delta, 0.01, -1, 1, 2001)
    assert grid_metrics(u, v).l1 == pytest.approx(delta * math.sqrt(2 / (math.pi * 0.01)),
                                                  rel=1e-3)
    with pytest.raises(ParameterError):
        grid_metrics(u, DensityGrid.gaussian(0.0, 0.01, -1, 1, 201))
