"""Integration drivers: a fixed-step loop and an EST-controlled variable-step loop.

Both start with one unfiltered theta step, since the filter needs two back
values.  That startup record has ``est = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from thetafilter import kernels
from thetafilter.accuracy import second_order_nu_variable
from thetafilter.core import (
    DEGENERATE_TOL,
    IvpProblem,
    MethodParams,
    SingularJacobian,
    StepMode,
    StepRecord,
    StepUnderflow,
    Trajectory,
    norm,
)
from thetafilter.stepper import NewtonConfig, _advance, _solve_theta

_EST_FLOOR = 1e-16


@dataclass(frozen=True)
class NuPolicy:
    """How the filter parameter is chosen at each step.

    ``NuPolicy.SECOND_ORDER`` picks ``second_order_nu_variable(theta, tau)``;
    ``NuPolicy.fixed(nu)`` keeps nu constant.
    """

    kind: str
    nu: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("second_order", "fixed"):
            raise ValueError(f"unknown nu policy {self.kind!r}")
        if self.kind == "fixed" and (self.nu is None or not math.isfinite(self.nu)):
            raise ValueError("fixed policy needs a finite nu")

    @classmethod
    def fixed(cls, nu: float) -> "NuPolicy":
        return cls("fixed", float(nu))

    def nu_for(self, theta: float, tau: float) -> float:
        if self.kind == "fixed":
            return self.nu
        return second_order_nu_variable(theta, tau)


NuPolicy.SECOND_ORDER = NuPolicy("second_order")


@dataclass(frozen=True)
class ControllerConfig:
    """Step-size controller settings.

    ``tau_max=None`` resolves per run: 1.0 when ``theta >= 1/2`` with the
    second-order policy (growth beyond 1 would leave the A-stable set),
    otherwise 2.0.  ``k_init`` seeds the startup search; by default a
    hundredth of the interval.
    """

    tol: float
    safety: float = 0.9
    k_min: float = 1e-12
    k_max: float = math.inf
    tau_max: Optional[float] = None
    tau_min: float = 0.2
    order_for_control: int = 2
    k_init: Optional[float] = None
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0.0 < self.safety <= 1.0:
            raise ValueError("safety must lie in (0, 1]")
        if not (0.0 < self.k_min < self.k_max):
            raise ValueError("need 0 < k_min < k_max")
        if not 0.0 < self.tau_min <= 1.0:
            raise ValueError("need 0 < tau_min <= 1")
        if self.tau_max is not None and not self.tau_max >= 1.0:
            raise ValueError("need tau_max >= 1")
        if self.order_for_control < 1:
            raise ValueError("order_for_control must be >= 1")
        if self.k_init is not None and not self.k_init > 0:
            raise ValueError("k_init must be positive")

    def resolved_tau_max(self, theta: float, policy: NuPolicy) -> float:
        if self.tau_max is not None:
            return float(self.tau_max)
        return 1.0 if (theta >= 0.5 and policy.kind == "second_order") else 2.0


def _step_count(span: float, k: float) -> tuple[int, float]:
    """Number of steps and the size of the last one (clipped to land on the end)."""
    q = span / k
    n = round(q)
    if abs(q - n) <= 1e-9 * max(1.0, q):
        return int(n), k
    n = math.ceil(q)
    return n, span - (n - 1) * k


def _solve_fixed_linear(problem, params, k, n):
    lam = float(problem.linear.matrix[0, 0])
    if abs(1.0 - k * params.theta * lam) <= 1e-14 * (1.0 + abs(k * params.theta * lam)):
        raise SingularJacobian("implicit linear system is singular", t=problem.t0)
    times = problem.t0 + k * np.arange(n + 1)
    times[-1] = problem.t_end
    g = np.array([problem.linear.forcing(t)[0] for t in times])
    y, ys = kernels.linear_theta_filter(lam, g, problem.y0[0], k, params.theta, params.nu)
    recs = [StepRecord(t=problem.t0, k=k, y=problem.y0, y_star=problem.y0, est=0.0)]
    for i in range(1, n + 1):
        recs.append(StepRecord(t=times[i], k=k, y=(y[i],), y_star=(ys[i],), est=abs(y[i] - ys[i])))
    return recs


def solve_fixed(problem: IvpProblem, params: MethodParams, k: float,
                cfg: NewtonConfig = NewtonConfig()) -> Trajectory:
    """Fixed step ``k``: one unfiltered theta step, then filtered steps.

    If ``k`` does not divide the interval the last step is shortened to land
    on ``t_end`` and filtered with the ratio of that step to ``k``.

    Raises
    ------
    NonConvergence
        With the failing ``t_n`` attached.
    """
    span = problem.t_end - problem.t0
    if not k > 0:
        raise ValueError(f"step size must be positive, got {k}")
    if span / k < 2.0 - 1e-9:
        raise ValueError("need at least two steps in the interval")
    n, k_last = _step_count(span, k)
    meta = {"driver": "fixed", "k": k}

    if (cfg.linear_solve and problem.linear is not None and problem.dim == 1
            and k_last == k and not params.variable):
        recs = _solve_fixed_linear(problem, params, k, n)
        return Trajectory(records=tuple(recs), problem_id=problem.name, params=params, meta=meta)

    y_nm1 = problem.y0
    recs = [StepRecord(t=problem.t0, k=k, y=y_nm1, y_star=y_nm1, est=0.0)]
    y_n, iters = _solve_theta(problem, problem.t0, y_nm1, k, params.theta, cfg)
    recs.append(StepRecord(t=problem.t0 + k, k=k, y=y_n, y_star=y_n, est=0.0, newton_iters=iters))
    for i in range(1, n):
        t_n = problem.t0 + i * k
        last = i == n - 1
        k_n = k_last if last else k
        clipped = last and k_last != k
        y_next, y_star, est, iters = _advance(problem, t_n, y_n, y_nm1, k_n, k, params.theta, params.nu,
                                              params.variable or clipped, cfg)
        t_next = problem.t_end if last else problem.t0 + (i + 1) * k
        recs.append(StepRecord(t=t_next, k=k_n, y=y_next, y_star=y_star, est=est, newton_iters=iters))
        y_nm1, y_n = y_n, y_next
    return Trajectory(records=tuple(recs), problem_id=problem.name, params=params, meta=meta)


def _startup(problem: IvpProblem, theta: float, ctrl: ControllerConfig, cfg: NewtonConfig):
    """Unfiltered first step whose size passes a step-doubling error test."""
    span = problem.t_end - problem.t0
    k = ctrl.k_init if ctrl.k_init is not None else 0.01 * span
    k = min(k, ctrl.k_max, 0.5 * span)
    y0 = problem.y0
    while True:
        full, iters = _solve_theta(problem, problem.t0, y0, k, theta, cfg)
        half, _ = _solve_theta(problem, problem.t0, y0, 0.5 * k, theta, cfg)
        half, _ = _solve_theta(problem, problem.t0 + 0.5 * k, half, 0.5 * k, theta, cfg)
        err = norm(full - half)
        if err <= ctrl.tol:
            return k, full, iters
        k *= max(ctrl.tau_min, min(0.5, ctrl.safety * math.sqrt(ctrl.tol / err)))
        if k < ctrl.k_min:
            raise StepUnderflow(f"startup step fell below k_min={ctrl.k_min:g}", t=problem.t0)


def solve_adaptive(problem: IvpProblem, theta: float, ctrl: ControllerConfig,
                   cfg: NewtonConfig = NewtonConfig(),
                   nu_policy: NuPolicy = NuPolicy.SECOND_ORDER) -> Trajectory:
    """Variable-step integration controlled by ``EST = |y_{n+1} - y*_{n+1}|``.

    A step is accepted iff ``est <= tol``.  After acceptance the next step is
    ``safety k (tol/est)^(1/p)`` with the ratio clamped to
    ``[tau_min, tau_max]`` and the result to ``[k_min, k_max]``; after a
    rejection the ratio is additionally capped at 1/2.  nu is re-evaluated
    from the policy for every attempted ``tau = k_n / k_{n-1}``.

    Raises
    ------
    StepUnderflow
        A rejected step would have to go below ``k_min``.
    NonConvergence
        Propagated from the implicit solve.
    """
    MethodParams(theta, 0.0, StepMode.VARIABLE)  # validates theta
    tau_max = ctrl.resolved_tau_max(theta, nu_policy)
    p_inv = 1.0 / ctrl.order_for_control
    t_end = problem.t_end
    eps_t = 1e-13 * (t_end - problem.t0)

    k0, y1, iters = _startup(problem, theta, ctrl, cfg)
    recs = [StepRecord(t=problem.t0, k=k0, y=problem.y0, y_star=problem.y0, est=0.0),
            StepRecord(t=problem.t0 + k0, k=k0, y=y1, y_star=y1, est=0.0, newton_iters=iters)]
    t, y_n, y_nm1, k_prev = problem.t0 + k0, y1, problem.y0, k0
    k = k_prev
    rejected = 0
    nus = []
    while t < t_end - eps_t:
        if len(recs) > ctrl.max_steps:
            raise StepUnderflow(f"exceeded max_steps={ctrl.max_steps}", t=t)
        final = t + k >= t_end - eps_t
        k_try = t_end - t if final else k
        tau = k_try / k_prev
        nu = nu_policy.nu_for(theta, tau)
        if abs(1.0 + tau - nu) <= 1e3 * DEGENERATE_TOL:
            k *= 0.99  # step off the excluded ratio
            continue
        y_next, y_star, est, iters = _advance(problem, t, y_n, y_nm1, k_try, k_prev, theta, nu, True, cfg)
        if est <= ctrl.tol:
            t = t_end if final else t + k_try
            recs.append(StepRecord(t=t, k=k_try, y=y_next, y_star=y_star, est=est, newton_iters=iters))
            nus.append(nu)
            y_nm1, y_n, k_prev = y_n, y_next, k_try
            floor = _EST_FLOOR * (1.0 + norm(y_next))
            ratio = ctrl.safety * (ctrl.tol / max(est, floor)) ** p_inv
            ratio = min(tau_max, max(ctrl.tau_min, ratio))
            k = min(ctrl.k_max, max(ctrl.k_min, k_try * ratio))
        else:
            rejected += 1
            ratio = min(0.5, max(ctrl.tau_min, ctrl.safety * (ctrl.tol / est) ** p_inv))
            k = k_try * ratio
            if k < ctrl.k_min:
                raise StepUnderflow(f"step fell below k_min={ctrl.k_min:g} with est={est:.3g}", t=t)
    meta = {"driver": "adaptive", "tol": ctrl.tol, "tau_max": tau_max, "rejected": rejected,
            "nu": tuple(nus), "policy": nu_policy.kind}
    return Trajectory(records=tuple(recs), problem_id=problem.name,
                      params=MethodParams(theta, nus[-1] if nus else 0.0, StepMode.VARIABLE), meta=meta)
