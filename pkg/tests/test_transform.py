import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nfpe.errors import DomainError, ParameterError
from nfpe.model import CoefficientSet, ModelParams, exp_decay
from nfpe.transform import (A_plus_minus, TransformContext, drift_full, drift_zero,
                            jacobian_dy_dx, q_full, q_zero, x_of_y, y_of_x)


def make_ctx(f=1.0, g=0.0, a=1.0, alpha=0.44, kappa=0.1, eps=0.019, beta=0.0):
    return TransformContext(ModelParams(alpha=alpha, kappa=kappa, a=a, epsilon=eps),
                            CoefficientSet.from_functions(f, g, beta))


def test_a_zero_rejected():
    with pytest.raises(ParameterError):
        make_ctx(a=0.0)


def test_y_of_x_examples():
    ctx = make_ctx()
    assert y_of_x(ctx, 0.0, 0.0) == 0.0
    assert y_of_x(ctx, math.sinh(1.0), 0.0) == pytest.approx(1.0, abs=1e-15)
    assert y_of_x(make_ctx(f=0.0), 1.0, 0.0) == pytest.approx(math.log(2.0), abs=1e-15)


def test_x_of_y_examples():
    ctx = make_ctx()
    assert x_of_y(ctx, 0.0, 0.0) == 0.0
    assert x_of_y(ctx, 1.0, 0.0) == pytest.approx(1.17520, abs=5e-6)
    assert x_of_y(ctx, 1.0, 0.0) == pytest.approx(math.sinh(1.0), rel=1e-15)


def test_roundtrip_example():
    ctx = make_ctx(f=0.5, g=0.3)
    x = np.arange(-5, 6, dtype=float)
    assert np.max(np.abs(x_of_y(ctx, y_of_x(ctx, x, 0.0), 0.0) - x)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(x=st.floats(-50, 50), f=st.floats(1e-3, 10), g=st.floats(-3, 3), a=st.floats(0.1, 3))
def test_roundtrip_property(x, f, g, a):
    ctx = make_ctx(f=f, g=g, a=a)
    assert x_of_y(ctx, y_of_x(ctx, x, 0.0), 0.0) == pytest.approx(x, abs=1e-12 * max(1, abs(x)) / min(1, a) * 10)


def test_stable_for_large_negative_argument():
    ctx = make_ctx(f=1.0)
    x = -1e3
    y = y_of_x(ctx, x, 0.0)
    assert np.isfinite(y)
    assert x_of_y(ctx, y, 0.0) == pytest.approx(x, rel=1e-12)
    assert y == pytest.approx(math.asinh(x), rel=1e-15)


def test_jacobian_examples():
    assert jacobian_dy_dx(make_ctx(), 0.0, 0.0) == 1.0
    assert jacobian_dy_dx(make_ctx(f=0.0), 2.0, 0.0) == 0.5


@pytest.mark.parametrize("f,g,a", [(1.0, 0.0, 1.0), (0.5, 0.3, 1.0), (0.157895, 0.04, 2.0)])
def test_jacobian_matches_central_difference(f, g, a):
    ctx = make_ctx(f=f, g=g, a=a)
    x = np.linspace(-5, 5, 101)
    h = 1e-5
    fd = (y_of_x(ctx, x + h, 0.0) - y_of_x(ctx, x - h, 0.0)) / (2 * h)
    assert np.max(np.abs(fd - jacobian_dy_dx(ctx, x, 0.0))) < 1e-8


def test_monotone():
    ctx = make_ctx(f=0.2, g=-0.4, a=1.5)
    y = y_of_x(ctx, np.linspace(-10, 10, 2001), 0.0)
    assert np.all(np.diff(y) > 0)


def test_f_zero_domain_rule():
    ctx = make_ctx(f=0.0, g=0.1)
    with pytest.raises(DomainError):
        y_of_x(ctx, np.array([-1.0, 1.0]), 0.0)
    with pytest.raises(DomainError):
        jacobian_dy_dx(ctx, -0.1, 0.0)
    assert np.isfinite(y_of_x(ctx, 0.5, 0.0))


def test_a_plus_minus_examples():
    assert A_plus_minus(make_ctx(), 0.0, 0.0) == (2.0, 0.0)
    ap, am = A_plus_minus(make_ctx(f=0.5), 1.0, 0.0)
    assert ap == pytest.approx(2.90222, abs=5e-6) and am == pytest.approx(2.53434, abs=5e-6)
    y = np.linspace(-2, 2, 9)
    ap, am = A_plus_minus(make_ctx(f=0.0), y, 0.0)
    np.testing.assert_array_equal(ap, np.exp(y))
    np.testing.assert_array_equal(am, np.exp(y))


def test_a_plus_minus_identity():
    rng = np.random.default_rng(3)
    for f in (0.1, 0.5, 2.0):
        y = rng.uniform(-2, 2, 50)
        ap, am = A_plus_minus(make_ctx(f=f, a=0.8), y, 0.0)
        np.testing.assert_allclose(ap ** 2 - am ** 2, 4 * f, atol=1e-13)


def test_q_examples():
    ctx = make_ctx(alpha=0.44)
    assert q_zero(ctx, 0.0, 0.0) == 0.0
    assert q_zero(ctx, 1.0, 0.0) == pytest.approx(1.03418, abs=5e-6)
    assert q_zero(ctx, 1.0, 0.0) == pytest.approx(0.44 * 2 * math.sinh(1.0), rel=1e-15)


def test_q_epsilon_part():
    f, f_dot = exp_decay(0.7, 0.5)
    g, g_dot = exp_decay(0.2, 1.0)
    ctx = TransformContext(ModelParams(alpha=0.44, kappa=0.3, a=1.3, epsilon=0.05),
                           CoefficientSet.from_functions(f, g, 0.1, f_dot=f_dot, g_dot=g_dot))
    rng = np.random.default_rng(0)
    y = rng.uniform(-3, 3, 100)
    t = 0.4
    _, am = A_plus_minus(ctx, y, t)
    np.testing.assert_allclose(q_full(ctx, y, t) - q_zero(ctx, y, t), 1.3 * 0.05 * am,
                               atol=1e-14, rtol=0)
    ap, _ = A_plus_minus(ctx, y, t)
    np.testing.assert_allclose(drift_full(ctx, y, t) - drift_zero(ctx, y, t),
                               1.3 * 0.05 * am / ap, atol=1e-14)


def test_transformed_equation_pullback():
    # for any smooth v(y, t) and u(x, t) = v(y(x, t), t) the residuals of the x-equation
    # and of v_t = alpha v + (q/A+) v_y + eps v_yy coincide pointwise
    f, f_dot = exp_decay(0.6, 0.3)
    g, g_dot = exp_decay(0.2, 0.7)
    p = ModelParams(alpha=0.44, kappa=0.1, a=1.2, epsilon=0.05)
    ctx = TransformContext(p, CoefficientSet.from_functions(f, g, 0.3, f_dot=f_dot, g_dot=g_dot))

    def v(y, t):
        return np.exp(-(y - 0.3 * t) ** 2) * (1 + 0.2 * t)

    y = np.linspace(-1, 1, 21)
    t, h = 0.5, 1e-4

    def u_of_x(x, tt):
        return v(y_of_x(ctx, x, tt), tt)
    x = x_of_y(ctx, y, t)
    D = lambda xx, tt: f(tt) + (p.a * xx + g(tt)) ** 2
    flux = lambda xx, tt: ((p.alpha * xx + p.kappa * 0.3) * u_of_x(xx, tt)
                           + p.epsilon * D(xx, tt) * (u_of_x(xx + h, tt) - u_of_x(xx - h, tt)) / (2 * h))
    u_t = (u_of_x(x, t + h) - u_of_x(x, t - h)) / (2 * h)
    rhs_x = (flux(x + h, t) - flux(x - h, t)) / (2 * h)
    v_t = (v(y, t + h) - v(y, t - h)) / (2 * h)
    v_y = (v(y + h, t) - v(y - h, t)) / (2 * h)
    v_yy = (v(y + h, t) - 2 * v(y, t) + v(y - h, t)) / h ** 2
    ap, _ = A_plus_minus(ctx, y, t)
    rhs_y = p.alpha * v(y, t) + q_full(ctx, y, t) / ap * v_y + p.epsilon * v_yy
    assert np.max(np.abs(v_t - rhs_y)) > 0.1
    np.testing.assert_allclose(u_t - rhs_x, v_t - rhs_y, atol=2e-5)
