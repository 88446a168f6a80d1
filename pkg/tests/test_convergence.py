import math

import pytest

from thetafilter.adaptive import solve_fixed
from thetafilter.convergence import convergence_study, observed_rates, trajectory_error
from thetafilter.core import MethodParams
from thetafilter.problems import linear_test, lorenz


def test_rates():
    r = observed_rates([1.0, 4.0, 16.0])
    assert math.isnan(r[0]) and r[1:] == [2.0, 2.0]


def test_metrics():
    p = linear_test(-10.0)
    tr = solve_fixed(p, MethodParams(1.0, 0.0), 0.01)
    end, mx, l2 = (trajectory_error(tr, p, m) for m in ("end", "max", "l2"))
    assert end <= mx and l2 <= mx
    with pytest.raises(ValueError):
        trajectory_error(tr, p, "rms")
    with pytest.raises(ValueError):
        trajectory_error(solve_fixed(lorenz(1.0), MethodParams(1.0, 0.0), 0.1), lorenz(1.0))


def test_study_layout():
    cols = convergence_study(linear_test(-10.0), 1.0, [0.0, 2.0 / 3.0], dts=(0.005, 0.01))
    assert [c.nu for c in cols] == [0.0, 2.0 / 3.0]
    assert len(cols[0].errors) == 2 and math.isnan(cols[0].rates[0])
