import math

import numpy as np
import pytest

from thetafilter.core import (
    DegenerateDenominator,
    IvpProblem,
    LinearStructure,
    MethodParams,
    MultistepCoeffs,
    NonConvergence,
    StepMode,
    StepRecord,
    Trajectory,
    norm,
)


def _decay():
    return IvpProblem(name="decay", rhs=lambda t, y: -y, y0=[1.0], t0=0.0, t_end=1.0,
                      exact=lambda t: np.array([math.exp(-t)]))


def test_norm_is_max_abs():
    assert norm([1.0, -3.0, 2.0]) == 3.0
    assert norm(np.array([-2.5])) == 2.5
    assert norm(np.array([])) == 0.0


def test_problem_validates_span_and_exact():
    with pytest.raises(ValueError):
        IvpProblem(name="bad", rhs=lambda t, y: y, y0=[1.0], t0=1.0, t_end=1.0)
    with pytest.raises(ValueError, match="exact"):
        IvpProblem(name="bad", rhs=lambda t, y: y, y0=[1.0], t0=0.0, t_end=1.0,
                   exact=lambda t: np.array([2.0]))
    with pytest.raises(ValueError, match="shape"):
        IvpProblem(name="bad", rhs=lambda t, y: np.zeros(2), y0=[1.0], t0=0.0, t_end=1.0)


def test_problem_state_is_read_only():
    p = _decay()
    assert p.dim == 1
    with pytest.raises(ValueError):
        p.y0[0] = 3.0


def test_linear_structure_dimension_checked():
    with pytest.raises(ValueError):
        LinearStructure(matrix=[[1.0, 2.0]], forcing=lambda t: np.zeros(1))
    with pytest.raises(ValueError, match="dimension"):
        IvpProblem(name="bad", rhs=lambda t, y: y, y0=[1.0], t0=0.0, t_end=1.0,
                   linear=LinearStructure(np.eye(2), lambda t: np.zeros(2)))


def test_method_params_rejects_constant_nu_two():
    with pytest.raises(DegenerateDenominator, match="nu=2 degenerate"):
        MethodParams(0.0, 2.0)
    # variable mode defers the check until tau is known
    assert MethodParams(0.5, 2.0, StepMode.VARIABLE).variable


@pytest.mark.parametrize("theta", [-0.1, 1.5, math.nan])
def test_method_params_theta_range(theta):
    with pytest.raises(ValueError):
        MethodParams(theta, 0.0)


def test_step_record_est_must_match():
    StepRecord(t=0.1, k=0.1, y=[1.0, 2.0], y_star=[1.5, 2.0], est=0.5)
    with pytest.raises(ValueError, match="est"):
        StepRecord(t=0.1, k=0.1, y=[1.0], y_star=[1.5], est=0.1)
    with pytest.raises(ValueError):
        StepRecord(t=0.1, k=0.0, y=[1.0], y_star=[1.0], est=0.0)


def test_trajectory_requires_increasing_time():
    r0 = StepRecord(t=0.0, k=0.1, y=[1.0], y_star=[1.0], est=0.0)
    r1 = StepRecord(t=0.1, k=0.1, y=[0.9], y_star=[0.9], est=0.0)
    tr = Trajectory(records=[r0, r1], problem_id="x")
    assert tr.n_steps == 1
    np.testing.assert_array_equal(tr.t, [0.0, 0.1])
    with pytest.raises(ValueError):
        Trajectory(records=[r1, r0], problem_id="x")


def test_multistep_coeffs_consistency_enforced():
    with pytest.raises(ValueError, match="sum"):
        MultistepCoeffs(alpha=(1.0, -0.5, 0.0), beta=(1.0, 0.0, 0.0), theta=1.0)


def test_nonconvergence_message_carries_time():
    err = NonConvergence("stuck", t=0.25)
    assert "t_n=0.25" in str(err)
    assert isinstance(err, ArithmeticError)
