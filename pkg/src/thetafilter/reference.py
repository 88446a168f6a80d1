"""Dormand-Prince 5(4) reference integrator, used as an accuracy oracle."""
from __future__ import annotations

from fractions import Fraction as F

import numpy as np

from thetafilter.core import IvpProblem, StepRecord, StepUnderflow, Trajectory, norm

# Butcher tableau as exact rationals; floats are derived once below.
DP_C = (F(0), F(1, 5), F(3, 10), F(4, 5), F(8, 9), F(1), F(1))
DP_A = (
    (),
    (F(1, 5),),
    (F(3, 40), F(9, 40)),
    (F(44, 45), F(-56, 15), F(32, 9)),
    (F(19372, 6561), F(-25360, 2187), F(64448, 6561), F(-212, 729)),
    (F(9017, 3168), F(-355, 33), F(46732, 5247), F(49, 176), F(-5103, 18656)),
    (F(35, 384), F(0), F(500, 1113), F(125, 192), F(-2187, 6784), F(11, 84)),
)
DP_B5 = (F(35, 384), F(0), F(500, 1113), F(125, 192), F(-2187, 6784), F(11, 84), F(0))
DP_B4 = (F(5179, 57600), F(0), F(7571, 16695), F(393, 640), F(-92097, 339200), F(187, 2100), F(1, 40))

_C = np.array([float(c) for c in DP_C])
_A = [np.array([float(a) for a in row]) for row in DP_A]
_B5 = np.array([float(b) for b in DP_B5])
_E = np.array([float(b5 - b4) for b5, b4 in zip(DP_B5, DP_B4)])

_SAFETY = 0.9
_FAC_MIN, _FAC_MAX = 0.2, 5.0


def _initial_step(problem: IvpProblem, f0: np.ndarray, tol: float) -> float:
    span = problem.t_end - problem.t0
    scale = tol * (1.0 + norm(problem.y0))
    d1 = norm(f0)
    h = 0.01 * span if d1 == 0.0 else (scale / d1) ** 0.2
    return min(max(h, 1e-12 * span), 0.1 * span)


def rk_reference(problem: IvpProblem, tol: float, t_eval=None, max_steps: int = 10_000_000) -> Trajectory:
    """Adaptive Dormand-Prince integration with ``atol = rtol = tol``.

    The error test is ``|err| <= tol (1 + max(|y_n|, |y_{n+1}|))`` in the max
    norm.  With ``t_eval`` the steps are clipped to land on those times and
    only they are recorded (plus ``t0``).  Records carry ``y_star = y`` and
    ``est = 0``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    t0, t_end = problem.t0, problem.t_end
    if t_eval is None:
        stops, wanted = [t_end], None
    else:
        wanted = {float(t) for t in t_eval if t0 < t <= t_end}
        stops = sorted(wanted | {t_end})
    keep_all = wanted is None

    t, y = t0, problem.y0.astype(float).copy()
    k1 = problem.f(t, y)
    h = _initial_step(problem, k1, tol)
    h_min = 1e-14 * (t_end - t0)
    first_h = h
    records = []
    stages = np.empty((7, y.size))
    n_steps = 0
    stop_idx = 0
    while stop_idx < len(stops):
        target = stops[stop_idx]
        clipped = t + h >= target - 1e-14 * (t_end - t0)
        h_try = target - t if clipped else h
        stages[0] = k1
        # overflow on a blowing-up solution just reads as a failed step
        with np.errstate(over="ignore", invalid="ignore"):
            for i in range(1, 7):
                yi = y + h_try * (_A[i] @ stages[:i])
                stages[i] = problem.f(t + _C[i] * h_try, yi)
            y_new = yi  # row 7 of A equals b5 (first-same-as-last)
            err = norm(h_try * (_E @ stages))
        scale = tol * (1.0 + max(norm(y), norm(y_new)))
        ratio = err / scale if scale > 0 else np.inf
        if not np.isfinite(ratio):
            ratio = np.inf
        if ratio <= 1.0:
            t = target if clipped else t + h_try
            y = y_new
            k1 = stages[6].copy()
            n_steps += 1
            if n_steps == 1:
                first_h = h_try
            if keep_all or (clipped and t in wanted):
                records.append(StepRecord(t=t, k=h_try, y=y, y_star=y, est=0.0))
            if clipped:
                stop_idx += 1
            fac = _FAC_MAX if ratio == 0.0 else min(_FAC_MAX, max(_FAC_MIN, _SAFETY * ratio ** -0.2))
            if not clipped or h_try >= h:
                h = h_try * fac
        else:
            fac = max(_FAC_MIN, _SAFETY * ratio ** -0.2) if np.isfinite(ratio) else _FAC_MIN
            h = h_try * fac
            if h < h_min:
                raise StepUnderflow(f"reference step fell below {h_min:g}", t=t)
        if n_steps > max_steps:
            raise StepUnderflow(f"reference solver exceeded {max_steps} steps", t=t)
    init = StepRecord(t=t0, k=first_h, y=problem.y0, y_star=problem.y0, est=0.0)
    return Trajectory(records=(init, *records), problem_id=problem.name,
                      meta={"method": "dopri5", "tol": tol, "steps": n_steps})
