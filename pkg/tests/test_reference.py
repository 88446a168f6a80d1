from fractions import Fraction

import numpy as np
import pytest

from thetafilter.core import IvpProblem, StepUnderflow
from thetafilter.problems import linear_test, lorenz
from thetafilter.reference import DP_A, DP_B4, DP_B5, DP_C, rk_reference


@pytest.mark.parametrize("b", [DP_B5, DP_B4])
def test_order_conditions(b):
    c = DP_C
    a = [list(row) + [Fraction(0)] * (7 - len(row)) for row in DP_A]
    ac = [sum(a[i][j] * c[j] for j in range(7)) for i in range(7)]
    assert sum(b) == 1
    assert sum(bi * ci for bi, ci in zip(b, c)) == Fraction(1, 2)
    assert sum(bi * ci ** 2 for bi, ci in zip(b, c)) == Fraction(1, 3)
    assert sum(bi * x for bi, x in zip(b, ac)) == Fraction(1, 6)
    assert sum(bi * ci ** 3 for bi, ci in zip(b, c)) == Fraction(1, 4)
    assert sum(bi * ci * x for bi, ci, x in zip(b, c, ac)) == Fraction(1, 8)
    assert sum(bi * a[i][j] * c[j] ** 2 for i, bi in enumerate(b) for j in range(7)) == Fraction(1, 12)
    aac = [sum(a[i][j] * ac[j] for j in range(7)) for i in range(7)]
    assert sum(bi * x for bi, x in zip(b, aac)) == Fraction(1, 24)


def test_row_sums_match_nodes():
    for row, c in zip(DP_A, DP_C):
        assert sum(row) == c


def test_fifth_order_condition():
    assert sum(bi * ci ** 4 for bi, ci in zip(DP_B5, DP_C)) == Fraction(1, 5)


@pytest.mark.parametrize("lam,tol,bound", [(0.0, 1e-10, 1e-9), (-10.0, 1e-10, 1e-8),
                                           (-1.0, 1e-6, 1e-5), (-1.0, 1e-9, 1e-8)])
def test_linear_accuracy(lam, tol, bound):
    p = linear_test(lam)
    tr = rk_reference(p, tol)
    assert tr.final.t == 1.0
    assert abs(tr.final.y[0] - p.exact(1.0)[0]) <= bound


def test_self_convergence_monotone():
    p = linear_test(-10.0)
    exact = p.exact(1.0)[0]
    errs = [abs(rk_reference(p, tol).final.y[0] - exact) for tol in (1e-6, 5e-7, 2.5e-7, 1.25e-7)]
    for a, b in zip(errs[:-1], errs[1:]):
        assert b <= 4.0 * a


def test_lorenz_tolerance_consistency():
    p = lorenz(t_end=1.0)
    a = rk_reference(p, 1e-10).final.y
    b = rk_reference(p, 1e-12).final.y
    assert np.max(np.abs(a - b)) <= 1e-6


def test_t_eval_lands_on_requested_times():
    p = linear_test(-10.0)
    times = np.linspace(0.0, 1.0, 11)[1:]
    tr = rk_reference(p, 1e-10, t_eval=times)
    np.testing.assert_array_equal(tr.t, np.linspace(0.0, 1.0, 11))
    for r in tr.records:
        assert abs(r.y[0] - p.exact(r.t)[0]) <= 1e-9


def test_underflow_on_blowup():
    p = IvpProblem(name="blowup", rhs=lambda t, y: y * y, y0=[1.0], t0=0.0, t_end=2.0)
    with pytest.raises(StepUnderflow):
        rk_reference(p, 1e-8)
