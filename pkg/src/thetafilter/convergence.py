"""Error metrics and convergence tables against a closed-form solution."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from thetafilter.adaptive import solve_fixed
from thetafilter.core import IvpProblem, MethodParams, Trajectory
from thetafilter.stepper import NewtonConfig

DEFAULT_DTS = (0.00125, 0.0025, 0.005, 0.01, 0.02)
METRICS = ("l2", "max", "end")


def _errors(traj: Trajectory, problem: IvpProblem) -> np.ndarray:
    if problem.exact is None:
        raise ValueError(f"problem {problem.name!r} has no exact solution")
    return np.array([np.max(np.abs(r.y - problem.exact(r.t))) for r in traj.records])


def trajectory_error(traj: Trajectory, problem: IvpProblem, metric: str = "l2") -> float:
    """Global error of a trajectory.

    ``l2``: ``sqrt(sum_n k_n e_n^2)`` over all grid points (the initial point
    weighted by the first step); ``max``: largest pointwise error; ``end``:
    error at the final time.  ``e_n`` is the max norm over components.
    """
    e = _errors(traj, problem)
    if metric == "l2":
        return math.sqrt(float(np.sum(traj.k * e * e)))
    if metric == "max":
        return float(e.max())
    if metric == "end":
        return float(e[-1])
    raise ValueError(f"unknown metric {metric!r}; choose from {METRICS}")


def observed_rates(errors) -> list[float]:
    """``log2(err_{i} / err_{i-1})`` for steps doubling down the list; first entry nan."""
    rates = [math.nan]
    for prev, cur in zip(errors[:-1], errors[1:]):
        rates.append(math.log2(cur / prev) if prev > 0 and cur > 0 else math.nan)
    return rates


@dataclass(frozen=True)
class ConvergenceColumn:
    nu: float
    errors: tuple
    rates: tuple


def convergence_study(problem: IvpProblem, theta: float, nus, dts=DEFAULT_DTS, metric: str = "l2",
                      cfg: NewtonConfig = NewtonConfig()) -> list[ConvergenceColumn]:
    """One column of errors and rates per nu, rows in the order of ``dts``."""
    cols = []
    for nu in nus:
        params = MethodParams(theta, nu)
        errs = tuple(trajectory_error(solve_fixed(problem, params, k, cfg), problem, metric) for k in dts)
        cols.append(ConvergenceColumn(nu=float(nu), errors=errs, rates=tuple(observed_rates(errs))))
    return cols
