import math

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import std_normal
from nfpe import semiclassical as sc
from nfpe.errors import DomainError, ResolutionError, TrajectoryEscapeError, TruncationError
from nfpe.model import CoefficientSet, ModelParams, exp_decay
from nfpe.moments import moment_const_diffusion
from nfpe.transform import TransformContext, drift_zero, x_of_y, y_of_x

XI = sc.default_xi_grid()


def d4(values, dx):
    """Fourth-order central difference on the interior points."""
    return (values[:-4] - 8 * values[1:-3] + 8 * values[3:-1] - values[4:]) / (12 * dx)


def fixed_point_ctx(eps=0.02, a=1.0):
    return TransformContext(ModelParams(alpha=0.44, kappa=0.1, a=a, epsilon=eps),
                            CoefficientSet.constant(f=1.0, g=0.0, beta=0.0))


def manufactured(R=0.5, Q0=0.0, Q1=0.0, T=1.0, n=201, gamma=std_normal, alpha=None):
    tau = np.linspace(0.0, T, n)
    ones = np.ones(n)
    h, tp = sc.scale_and_time(R * ones, tau)
    return sc.SemiclassicalState(tau=tau, Y=0 * ones, R=R * ones, Q0=Q0 * ones, Q1=Q1 * ones,
                                 h=h, tau_prime=tp, xi_grid=XI,
                                 alpha=R if alpha is None else alpha,
                                 gamma=gamma, gamma_support=(XI[0], XI[-1]))


@pytest.fixture(scope="module")
def asymmetric():
    ctx = fixed_point_ctx()
    state = sc.build_state(ctx, 0.5, np.linspace(0, 1.2, 121), std_normal,
                           gamma_support=(XI[0], XI[-1]))
    return ctx, state


# ---- trajectory and coefficients -----------------------------------------

def test_trajectory_fixed_point():
    Y = sc.solve_trajectory(fixed_point_ctx(), 0.0, np.linspace(0, 2, 21))
    assert np.all(Y == 0.0)


def test_trajectory_decays_monotonically(asymmetric):
    _, state = asymmetric
    assert state.Y[0] == 0.5
    assert np.all(np.diff(state.Y) < 0) and state.Y[-1] > 0


def test_trajectory_ode_residual(asymmetric):
    ctx, state = asymmetric
    y_dot = state._splines["Y"].derivative()(state.tau)
    rhs = np.array([-drift_zero(ctx, y, t) for y, t in zip(state.Y, state.tau)])
    assert np.max(np.abs(y_dot - rhs)) <= 1e-6


def test_trajectory_small_a_follows_ou_mean():
    a = 1e-2
    ctx = fixed_point_ctx(a=a)
    p = ctx.params.with_(kappa=0.0)
    tau = np.linspace(0, 2, 41)
    Y = sc.solve_trajectory(ctx, 0.5, tau)
    X = np.array([moment_const_diffusion(p, x_of_y(ctx, 0.5, 0.0), t) for t in tau])
    assert np.max(np.abs(Y - y_of_x(ctx, X, 0.0))) < 10 * a * 0.5


def test_trajectory_escape():
    # f = 0, beta = 1: Y' = -2 kappa e^{-Y} - alpha drives Y to -inf near t = 0.5
    ctx = TransformContext(ModelParams(alpha=0.44, kappa=1.0, a=1.0, epsilon=0.02),
                           CoefficientSet.constant(f=0.0, g=0.0, beta=1.0))
    with pytest.raises(TrajectoryEscapeError) as info:
        sc.solve_trajectory(ctx, 0.0, np.linspace(0, 1, 101))
    assert 0.3 < info.value.time <= 0.6


def test_expansion_coeffs_fixed_point():
    ctx = fixed_point_ctx()
    tau = np.linspace(0, 1, 11)
    R, Q0, Q1 = sc.expansion_coeffs(ctx, np.zeros(11), tau)
    np.testing.assert_array_equal(R, 0.44)
    assert np.all(Q0 == 0) and np.all(Q1 == 0)


def test_expansion_coeffs_point_check():
    f, f_dot = exp_decay(0.5, 0.5)
    ctx = TransformContext(ModelParams(alpha=0.44, kappa=0.1, a=1.0, epsilon=0.02),
                           CoefficientSet.from_functions(f, 0.0, 0.0, f_dot=f_dot))
    R, Q0, Q1 = (v[0] for v in sc.expansion_coeffs(ctx, np.array([1.0]), np.array([0.0])))
    # hand evaluation: A+- = e +- 0.5/e, q0 = 0.25 e^{-1} + 0.44 A-, Y' = -q0/A+
    e = math.e
    ap, am = e + 0.5 / e, e - 0.5 / e
    y_dot = -(0.25 / e + 0.44 * am) / ap
    r_hand = (-0.25 / e + 0.44 * ap + y_dot * am) / ap
    q1_hand = am / ap
    q0_hand = (0.25 / e + 0.44 * am + y_dot * ap) / (2 * ap) - q1_hand * r_hand
    assert (R, Q0, Q1) == pytest.approx((r_hand, q0_hand, q1_hand), rel=1e-14)
    # independent route: R and Q0 are the first two Taylor coefficients of q0/A+ at Y
    d = 1e-4
    p = lambda y: drift_zero(ctx, y, 0.0)
    assert R == pytest.approx((p(1 + d) - p(1 - d)) / (2 * d), abs=1e-8)
    assert Q0 == pytest.approx((p(1 + d) - 2 * p(1.0) + p(1 - d)) / (2 * d * d), abs=1e-6)


def test_q1_bounded(asymmetric):
    _, state = asymmetric
    assert np.all(np.abs(state.Q1) <= 1.0)


def test_scale_and_time_closed_forms():
    tau = np.linspace(0, math.log(2), 201)
    h, tp = sc.scale_and_time(0.5 * np.ones(201), tau)
    assert h[-1] == pytest.approx(math.sqrt(2), rel=1e-12)
    assert tp[-1] == pytest.approx(1.0, rel=1e-9)
    h0, tp0 = sc.scale_and_time(np.zeros(201), tau)
    assert np.all(h0 == 1.0)
    np.testing.assert_allclose(tp0, tau, atol=1e-15)
    rng = np.random.default_rng(5)
    _, tp_r = sc.scale_and_time(rng.normal(0, 3, 201), tau)
    assert np.all(np.diff(tp_r) > 0)


# ---- phi0 -----------------------------------------------------------------

def test_phi0_identity_at_s():
    state = manufactured(T=math.log(2))
    np.testing.assert_array_equal(sc.phi0(state, 0.0), std_normal(XI))


def test_phi0_closed_form():
    state = manufactured(T=math.log(2))
    value = sc.phi0(state, math.log(2), xi=np.array([0.0]))
    assert value[0] == pytest.approx(0.32574, abs=5e-6)
    assert value[0] == pytest.approx(math.sqrt(2) / math.sqrt(6 * math.pi), rel=1e-9)


def test_phi0_mass_identity():
    state = manufactured(R=0.3, T=1.5, alpha=0.44)
    tau = 1.5
    mass = np.trapezoid(sc.phi0(state, tau), XI)
    assert mass == pytest.approx(math.exp(0.44 * tau) / float(state.at("h", tau)), abs=1e-8)


def test_phi0_positive_and_derivatives():
    state = manufactured(R=0.5, T=1.0)
    out = sc.phi0(state, 0.8, derivs=(0, 1, 2))
    assert np.all(out[0] > 0)
    dxi = XI[1] - XI[0]
    np.testing.assert_allclose(out[1][2:-2], d4(out[0], dxi), atol=1e-5)
    np.testing.assert_allclose(out[2][2:-2], d4(out[1], dxi), atol=1e-5)


def test_phi0_profile_override():
    state = manufactured(T=1.0)
    shifted = std_normal(XI - 0.5)
    a = sc.phi0(state, 0.5, gamma_xi=shifted)
    b = sc.phi0(manufactured(T=1.0, gamma=lambda z: std_normal(z - 0.5)), 0.5)
    np.testing.assert_allclose(a, b, atol=1e-8)


def test_phi0_truncation():
    state = manufactured(R=-0.6, T=2.0)  # h shrinks, the profile spreads past the grid
    with pytest.raises(TruncationError):
        sc.phi0(state, 2.0)


def test_profile_must_decay_on_support():
    with pytest.raises(TruncationError):
        manufactured(gamma=lambda z: np.ones_like(z))


# ---- phi1 -----------------------------------------------------------------

def test_phi1_vanishes_at_fixed_point():
    ctx = fixed_point_ctx()
    state = sc.build_state(ctx, 0.0, np.linspace(0, 1, 51), std_normal,
                           gamma_support=(XI[0], XI[-1]))
    assert np.all(sc.phi1(state, 1.0) == 0.0)


def test_phi1_zero_at_s(asymmetric):
    _, state = asymmetric
    assert np.all(sc.phi1(state, 0.0) == 0.0)


def test_phi1_odd_for_even_data():
    state = manufactured(R=0.4, Q0=0.3, Q1=-0.2, T=1.0)
    p1 = sc.phi1(state, 1.0)
    np.testing.assert_allclose(p1, -p1[::-1], atol=1e-12)
    assert abs(np.trapezoid(p1, XI)) < 1e-8
    assert np.max(np.abs(p1)) > 1e-2


def heat_identity_phi1(state, tau):
    """Closed form of the first correction for a standard normal profile."""
    s = state.s
    h = float(state.at("h", tau))
    tp = float(state.at("tau_prime", tau))
    t = lambda e: tp - float(state.at("tau_prime", e))
    opts = dict(epsabs=1e-14, epsrel=1e-12, limit=200)
    I = [quad(lambda e: float(state.at("Q0", e)) / float(state.at("h", e)) * t(e) ** k,
              s, tau, **opts)[0] for k in range(3)]
    J = quad(lambda e: float(state.at("Q1", e)) * float(state.at("h", e)), s, tau, **opts)[0]
    z, v = h * XI, 1 + 2 * tp
    w = z / math.sqrt(v)
    n = np.exp(-0.5 * w * w) / math.sqrt(2 * math.pi * v)
    d1, d2, d3 = -w / math.sqrt(v) * n, (w * w - 1) / v * n, -(w ** 3 - 3 * w) / v ** 1.5 * n
    return math.exp(state.alpha * (tau - s)) * (d1 * (J + z * z * I[0] + 2 * I[1])
                                                + 4 * z * d2 * I[1] + 4 * d3 * I[2])


def test_phi1_matches_heat_identity(asymmetric):
    _, state = asymmetric
    expected = heat_identity_phi1(state, 1.0)
    got = sc.phi1(state, 1.0)
    assert np.max(np.abs(expected)) > 1e-2
    assert np.max(np.abs(got - expected)) < 1e-8


def test_phi1_derivatives_consistent(asymmetric):
    _, state = asymmetric
    out = sc.phi1(state, 0.9, derivs=(0, 1, 2))
    dxi = XI[1] - XI[0]
    np.testing.assert_allclose(out[1][2:-2], d4(out[0], dxi), atol=1e-5)
    np.testing.assert_allclose(out[2][2:-2], d4(out[1], dxi), atol=1e-5)


# ---- equations and residuals ---------------------------------------------

def test_order_equations_manufactured():
    state = manufactured(R=0.4, Q0=0.3, Q1=-0.2, T=1.2)
    r0, r1 = sc.order_residuals(state, 1.0)
    assert r0 < 1e-6 and r1 < 1e-5


def test_order_equations_asymmetric(asymmetric):
    _, state = asymmetric
    r0, r1 = sc.order_residuals(state, 1.0)
    assert r0 < 1e-6 and r1 < 1e-5


def test_residual_stencil_must_fit(asymmetric):
    _, state = asymmetric
    with pytest.raises(ResolutionError):
        sc.residual(state, 0.03, 0.02)


def test_asymptotic_estimates_bounded(asymmetric):
    ctx, state = asymmetric
    p0, p1 = sc.profiles(state, 1.0)
    phi = p0[0] + math.sqrt(0.02) * p1[0]
    dphi = p0[1] + math.sqrt(0.02) * p1[1]
    norm = np.sqrt(np.trapezoid(phi ** 2, XI))
    assert np.sqrt(np.trapezoid((XI * phi) ** 2, XI)) / norm < 1e2
    assert np.sqrt(np.trapezoid(dphi ** 2, XI)) / norm < 1e2


# ---- physical density ----------------------------------------------------

def test_assemble_recovers_profile_at_s(asymmetric):
    ctx, state = asymmetric
    knots = XI[100:381:10]
    x = x_of_y(ctx, 0.5 + math.sqrt(0.02) * knots, 0.0)
    np.testing.assert_allclose(sc.assemble_values(state, 0.0, x), std_normal(knots),
                               rtol=1e-12, atol=1e-15)


def test_assemble_norm_drift_order_eps():
    drifts = []
    for eps in (0.01, 0.005):
        ctx = fixed_point_ctx(eps)
        x = np.linspace(-1.5, 1.5, 2001)
        u0, scale = sc.pullback_initial_density(ctx, 0.0, std_normal, x)
        state = sc.build_state(ctx, 0.0, np.linspace(0, 1, 51),
                               lambda z, c=scale: c * std_normal(z),
                               gamma_support=(XI[0], XI[-1]))
        assert u0.norm() == pytest.approx(1.0, abs=1e-14)
        drifts.append(abs(sc.assemble_density(state, 1.0, x).norm() - 1.0))
        assert drifts[-1] < eps
    assert 1.7 <= drifts[0] / drifts[1] <= 2.3


def test_assemble_peak_tracks_trajectory(asymmetric):
    ctx, state = asymmetric
    x = np.linspace(-0.5, 1.5, 4001)
    for tau in (0.5, 1.0):
        u = sc.assemble_density(state, tau, x, include_phi1=False)
        peak = x[np.argmax(u.values)]
        assert abs(peak - x_of_y(ctx, float(state.at("Y", tau)), tau)) <= u.dx


def test_assemble_normalize_flag(asymmetric):
    _, state = asymmetric
    u = sc.assemble_density(state, 1.0, np.linspace(-0.5, 1.5, 801), normalize=True)
    assert u.norm() == pytest.approx(1.0, abs=1e-14)


def test_assemble_outside_domain():
    ctx = TransformContext(ModelParams(alpha=0.44, kappa=0.1, a=1.0, epsilon=0.02),
                           CoefficientSet.constant(f=0.0, g=1.0, beta=0.0))
    state = sc.build_state(ctx, 0.5, np.linspace(0, 0.5, 26), std_normal,
                           gamma_support=(XI[0], XI[-1]))
    with pytest.raises(DomainError):
        sc.assemble_density(state, 0.2, np.linspace(-2.0, 1.0, 101))
