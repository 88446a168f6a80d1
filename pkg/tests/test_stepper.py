import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetafilter.core import (
    DegenerateDenominator,
    InvalidRatio,
    IvpProblem,
    MethodParams,
    NonConvergence,
    SingularJacobian,
    StepMode,
)
from thetafilter.problems import linear_test, lorenz
from thetafilter.stepper import (
    FilterCoefficients,
    JacobianMode,
    NewtonConfig,
    filter_constant,
    filter_variable,
    filtered_step,
    multistep_coeffs,
    theta_step,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)
taus = st.floats(0.05, 20.0)


def test_forward_euler_is_explicit():
    p = linear_test(-10.0)
    y = theta_step(p, 0.0, p.y0, 0.1, 0.0)
    # y0 + k f(0, y0) = 1 + 0.1 (-10 + 1)
    assert y[0] == pytest.approx(0.1, abs=1e-15)


def test_backward_euler_matches_closed_form():
    p = linear_test(-10.0)
    k = 0.1
    y = theta_step(p, 0.0, p.y0, k, 1.0)
    expected = (1.0 + k * (10.0 * math.sin(k) + math.cos(k))) / (1.0 + 10.0 * k)
    assert y[0] == pytest.approx(expected, rel=1e-12)


def test_linear_solve_path_agrees_with_newton():
    p = linear_test(-50.0)
    a = theta_step(p, 0.2, [0.3], 0.05, 0.7)
    b = theta_step(p, 0.2, [0.3], 0.05, 0.7, NewtonConfig(linear_solve=True))
    assert abs(a[0] - b[0]) <= 1e-12


def test_user_jacobian_agrees_with_finite_differences():
    p = lorenz()
    y = np.array([1.0, 2.0, 3.0])
    a = theta_step(p, 0.0, y, 0.01, 1.0)
    b = theta_step(p, 0.0, y, 0.01, 1.0, NewtonConfig(jacobian=JacobianMode.USER_SUPPLIED))
    assert np.max(np.abs(a - b)) <= 1e-12


def test_user_jacobian_missing_raises():
    p = IvpProblem(name="nojac", rhs=lambda t, y: -y, y0=[1.0], t0=0.0, t_end=1.0)
    with pytest.raises(ValueError, match="Jacobian"):
        theta_step(p, 0.0, p.y0, 0.1, 1.0, NewtonConfig(jacobian=JacobianMode.USER_SUPPLIED))


def test_newton_failure_reports_time():
    # y' = y^2 blows up; a huge implicit step has no real solution
    p = IvpProblem(name="blowup", rhs=lambda t, y: y * y + 1.0, y0=[1.0], t0=0.0, t_end=10.0)
    with pytest.raises(NonConvergence) as info:
        theta_step(p, 0.5, p.y0, 5.0, 1.0, NewtonConfig(max_iters=20))
    assert info.value.t == 0.5


def test_singular_linear_system():
    p = linear_test(1.0)
    with pytest.raises(SingularJacobian):
        theta_step(p, 0.0, p.y0, 1.0, 1.0, NewtonConfig(linear_solve=True))


def test_filter_constant_formula():
    assert filter_constant(3.0, 2.0, 0.0, 0.5) == pytest.approx(3.0 - 0.25 * (3.0 - 4.0))


def test_filter_invalid_ratio():
    with pytest.raises(InvalidRatio):
        filter_variable(1.0, 1.0, 1.0, 0.5, 0.0)
    with pytest.raises(InvalidRatio):
        FilterCoefficients.from_nu(0.5, -1.0)


def test_filter_coefficients_validation():
    fc = FilterCoefficients.from_nu(2.0 / 3.0, 1.5)
    assert fc.is_consistent(1.5)
    assert not fc.is_consistent(1.0)
    with pytest.raises(ValueError):
        FilterCoefficients(0.1, 0.1, 0.1)
    with pytest.raises(DegenerateDenominator):
        FilterCoefficients.from_nu(2.0, 1.0)


@given(nu=finite, tau=taus, a=finite, b=finite, t=finite)
def test_filter_preserves_linear_functions(nu, tau, a, b, t):
    # exact on linear data sampled at t - k_prev, t, t + k with k = tau * k_prev
    k_prev = 0.1
    y_nm1, y_n, y_star = a + b * (t - k_prev), a + b * t, a + b * (t + tau * k_prev)
    out = filter_variable(y_star, y_n, y_nm1, nu, tau)
    assert out == pytest.approx(y_star, abs=1e-9 * (1 + abs(nu)) * (1 + abs(a) + abs(b) * (abs(t) + 3)))


@given(nu=finite, ys=finite, yn=finite, ym=finite)
def test_variable_filter_reduces_to_constant(nu, ys, yn, ym):
    assert filter_variable(ys, yn, ym, nu, 1.0) == pytest.approx(
        filter_constant(ys, yn, ym, nu), abs=1e-9 * (1 + abs(nu)) * (1 + abs(ys) + abs(yn) + abs(ym)))


@given(nu=st.floats(-3.0, 1.9), tau=taus, ys=finite, yn=finite, ym=finite)
def test_filter_coefficients_apply_matches_filter(nu, tau, ys, yn, ym):
    fc = FilterCoefficients.from_nu(nu, tau)
    assert fc.apply(ys, yn, ym) == pytest.approx(filter_variable(ys, yn, ym, nu, tau),
                                                 abs=1e-9 * (1 + abs(nu)) * (1 + abs(ys) + abs(yn) + abs(ym)))


def test_nu_zero_filtered_step_is_plain_theta_step():
    p = lorenz()
    y_n, y_nm1 = np.array([1.0, 1.0, 1.0]), np.array([0.9, 1.1, 1.0])
    y, y_star, est = filtered_step(p, 0.3, y_n, y_nm1, 0.01, 0.01, MethodParams(0.5, 0.0))
    assert est == 0.0
    np.testing.assert_array_equal(y, theta_step(p, 0.3, y_n, 0.01, 0.5))


def test_filtered_step_est_is_correction_size():
    p = linear_test(-10.0)
    y, y_star, est = filtered_step(p, 0.1, [0.5], [0.6], 0.02, 0.01,
                                   MethodParams(1.0, 0.4, StepMode.VARIABLE))
    assert est == pytest.approx(abs(y[0] - y_star[0]), abs=0.0)
    tau = 2.0
    expected = y_star[0] - 0.4 / (1 + tau) * (y_star[0] - (1 + tau) * 0.5 + tau * 0.6)
    assert y[0] == pytest.approx(expected, rel=1e-14)


def test_multistep_coeffs_frozen_values():
    # theta=1, nu=2/3, tau=1: alpha = (3/2, -2, 1/2) is BDF2
    mc = multistep_coeffs(MethodParams(1.0, 2.0 / 3.0))
    np.testing.assert_allclose(mc.alpha, (1.5, -2.0, 0.5), rtol=1e-14)
    np.testing.assert_allclose(mc.beta, (1.5, -1.0, 0.5), rtol=1e-14)
    with pytest.raises(DegenerateDenominator):
        multistep_coeffs(MethodParams(0.5, 1.5, StepMode.VARIABLE), tau=0.5)


@settings(max_examples=300)
@given(theta=st.floats(0.0, 1.0), nu=st.floats(-2.0, 1.8), tau=st.floats(0.2, 5.0),
       yn=st.floats(-5, 5), ym=st.floats(-5, 5), lam=st.floats(-50, 5), k=st.floats(1e-3, 0.2))
def test_step_satisfies_two_step_relation(theta, nu, tau, yn, ym, lam, k):
    if abs(1 + tau - nu) < 0.05 or abs(1 - k * theta * lam) < 0.05:
        return
    p = IvpProblem(name="lin", rhs=lambda t, y: lam * y + math.sin(t), y0=[1.0], t0=0.0, t_end=10.0)
    params = MethodParams(theta, nu, StepMode.VARIABLE)
    y, _, _ = filtered_step(p, 0.3, [yn], [ym], k, k / tau, params, NewtonConfig(rel_tol=1e-14))
    res = multistep_coeffs(params, tau).residual(p.f, 0.3, k, y, [yn], [ym])
    scale = 1.0 + abs(yn) + abs(ym) + abs(y[0])
    assert abs(res[0]) <= 1e-10 * scale / abs(1 + tau - nu)
