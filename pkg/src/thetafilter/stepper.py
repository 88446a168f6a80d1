"""Step 1 (theta method) and Step 2 (three-point filter).

The filter only touches data already computed, so a single step is

    y*_{n+1} = y_n + k((1-theta) f(t_n, y_n) + theta f(t_{n+1}, y*_{n+1}))
    y_{n+1}  = y*_{n+1} - nu/(1+tau) (y*_{n+1} - (1+tau) y_n + tau y_{n-1})

with tau = 1 in constant-step mode.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from thetafilter.core import (
    DEGENERATE_TOL,
    DegenerateDenominator,
    InvalidRatio,
    IvpProblem,
    MethodParams,
    MultistepCoeffs,
    NonConvergence,
    SingularJacobian,
    norm,
)

_SQRT_EPS = float(np.sqrt(np.finfo(float).eps))


class JacobianMode(enum.Enum):
    FINITE_DIFFERENCE = "fd"
    USER_SUPPLIED = "user"


@dataclass(frozen=True)
class NewtonConfig:
    """Controls for the implicit solve in Step 1.

    Newton stops once an update satisfies
    ``|dy| <= rel_tol (1 + |y|) + abs_tol`` in the max norm.
    ``linear_solve`` lets problems that registered a :class:`LinearStructure`
    skip Newton entirely.  Off by default.
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_iters: int = 50
    jacobian: JacobianMode = JacobianMode.FINITE_DIFFERENCE
    linear_solve: bool = False

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("Newton tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class FilterCoefficients:
    """Weights of ``y_{n+1} = y* + (a y* + b y_n + c y_{n-1})``."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        scale = max(1.0, abs(self.a), abs(self.b), abs(self.c))
        if abs(self.a + self.b + self.c) > 1e-12 * scale:
            raise ValueError("filter weights must sum to zero")
        if abs(1.0 + self.a) <= DEGENERATE_TOL:
            raise DegenerateDenominator("filter weight a = -1 is excluded")

    @classmethod
    def from_nu(cls, nu: float, tau: float = 1.0) -> "FilterCoefficients":
        _check_tau(tau)
        return cls(a=-nu / (1.0 + tau), b=nu, c=-tau * nu / (1.0 + tau))

    def is_consistent(self, tau: float = 1.0, tol: float = 1e-12) -> bool:
        scale = max(1.0, abs(self.b), abs(self.c))
        return (abs(self.a + self.b + self.c) <= tol * scale
                and abs(self.b * tau + self.c * (1.0 + tau)) <= tol * scale * (1.0 + tau))

    def apply(self, y_star, y_n, y_nm1):
        return y_star + (self.a * y_star + self.b * y_n + self.c * y_nm1)


def _check_tau(tau: float) -> None:
    if not tau > 0:
        raise InvalidRatio(f"step ratio must be positive, got {tau}")


def _jacobian(problem: IvpProblem, t: float, y: np.ndarray, fy: np.ndarray, cfg: NewtonConfig):
    if cfg.jacobian is JacobianMode.USER_SUPPLIED:
        if problem.jac is None:
            raise ValueError(f"problem {problem.name!r} has no user-supplied Jacobian")
        return np.asarray(problem.jac(t, y), dtype=float).reshape(y.size, y.size)
    jac = np.empty((y.size, y.size))
    for j in range(y.size):
        h = _SQRT_EPS * (1.0 + abs(y[j]))
        yp = y.copy()
        yp[j] += h
        jac[:, j] = (problem.f(t, yp) - fy) / h
    return jac


def _solve_theta(problem: IvpProblem, t_n: float, y_n: np.ndarray, k: float,
                 theta: float, cfg: NewtonConfig):
    """Solve Step 1; returns ``(y_star, newton_iterations)``."""
    if not k > 0:
        raise ValueError(f"step size must be positive, got {k}")
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    y_n = np.asarray(y_n, dtype=float)
    f_n = problem.f(t_n, y_n)
    if theta == 0.0:
        return y_n + k * f_n, 0

    t1 = t_n + k
    known = y_n + k * (1.0 - theta) * f_n
    if cfg.linear_solve and problem.linear is not None:
        lin = problem.linear
        rhs = known + k * theta * np.asarray(lin.forcing(t1), dtype=float)
        if y_n.size == 1:
            lhs0 = 1.0 - k * theta * lin.matrix[0, 0]
            if abs(lhs0) <= 1e-14 * (1.0 + abs(k * theta * lin.matrix[0, 0])):
                raise SingularJacobian("implicit linear system is singular", t=t_n)
            return rhs / lhs0, 0
        lhs = np.eye(y_n.size) - k * theta * lin.matrix
        try:
            if np.linalg.cond(lhs) > 1e14:
                raise np.linalg.LinAlgError
            return np.linalg.solve(lhs, rhs), 0
        except np.linalg.LinAlgError:
            raise SingularJacobian("implicit linear system is singular", t=t_n) from None

    y = y_n + k * f_n  # explicit Euler predictor
    iters = 0
    while iters < cfg.max_iters:
        fy = problem.f(t1, y)
        resid = y - known - k * theta * fy
        if not np.any(resid):
            return y, iters
        jac = np.eye(y.size) - k * theta * _jacobian(problem, t1, y, fy, cfg)
        if y.size == 1:
            if abs(jac[0, 0]) <= 1e-14 * (1.0 + abs(1.0 - jac[0, 0])):
                raise SingularJacobian("Newton Jacobian is singular", t=t_n)
            dy = -resid / jac[0, 0]
        else:
            if not np.all(np.isfinite(jac)) or np.linalg.cond(jac) > 1e14:
                raise SingularJacobian("Newton Jacobian is singular", t=t_n)
            dy = np.linalg.solve(jac, -resid)
        if not np.all(np.isfinite(dy)):
            break
        y = y + dy
        iters += 1
        # the update just applied leaves an error far below |dy|
        if norm(dy) <= cfg.rel_tol * (1.0 + norm(y)) + cfg.abs_tol:
            return y, iters
    raise NonConvergence(f"Newton did not converge in {cfg.max_iters} iterations (k={k:g})", t=t_n)


def theta_step(problem: IvpProblem, t_n: float, y_n, k: float, theta: float,
               cfg: NewtonConfig = NewtonConfig()) -> np.ndarray:
    """Unfiltered theta step from ``(t_n, y_n)`` with step ``k``.

    theta = 0 is explicit Euler and skips Newton.  For theta > 0 the implicit
    relation is solved by Newton's method started from the explicit Euler
    predictor, until the Newton update is below ``rel_tol * (1 + |y*|)``.

    Raises
    ------
    NonConvergence
        Newton exhausted ``cfg.max_iters``.
    SingularJacobian
        ``I - k theta J`` is numerically singular.
    """
    return _solve_theta(problem, t_n, y_n, k, theta, cfg)[0]


def filter_constant(y_star, y_n, y_nm1, nu: float):
    """Constant-step filter ``y* - nu/2 (y* - 2 y_n + y_{n-1})``."""
    return y_star - 0.5 * nu * (y_star - 2.0 * y_n + y_nm1)


def filter_variable(y_star, y_n, y_nm1, nu: float, tau: float):
    """Variable-step filter with step ratio ``tau = k_n / k_{n-1}``."""
    _check_tau(tau)
    return y_star - nu / (1.0 + tau) * (y_star - (1.0 + tau) * y_n + tau * y_nm1)


def _apply_filter(y_star, y_n, y_nm1, nu: float, tau: float, variable: bool):
    if not variable and tau == 1.0:
        return filter_constant(y_star, y_n, y_nm1, nu)
    if abs(1.0 + tau - nu) <= DEGENERATE_TOL:
        raise DegenerateDenominator(f"nu={nu:g} equals 1+tau at tau={tau:g}")
    return filter_variable(y_star, y_n, y_nm1, nu, tau)


def _advance(problem, t_n, y_n, y_nm1, k_n, k_nm1, theta, nu, variable, cfg):
    y_star, iters = _solve_theta(problem, t_n, y_n, k_n, theta, cfg)
    tau = k_n / k_nm1 if variable else 1.0
    y_next = _apply_filter(y_star, np.asarray(y_n, float), np.asarray(y_nm1, float), nu, tau, variable)
    return y_next, y_star, norm(y_next - y_star), iters


def filtered_step(problem: IvpProblem, t_n: float, y_n, y_nm1, k_n: float, k_nm1: float,
                  params: MethodParams, cfg: NewtonConfig = NewtonConfig()):
    """Step 1 followed by Step 2.

    In variable mode the filter uses ``tau = k_n / k_nm1``; in constant mode
    ``k_nm1`` is ignored.  Returns ``(y_next, y_star, est)`` where
    ``est = |y_next - y_star|`` in the max norm.
    """
    y_next, y_star, est, _ = _advance(problem, t_n, y_n, y_nm1, k_n, k_nm1,
                                      params.theta, params.nu, params.variable, cfg)
    return y_next, y_star, est


def multistep_coeffs(params: MethodParams, tau: float = 1.0) -> MultistepCoeffs:
    """Coefficients of the two-step method equivalent to one filtered step.

    Constant mode ignores ``tau``.  The leading alpha and beta always agree.
    """
    nu = params.nu
    if params.variable:
        _check_tau(tau)
    else:
        tau = 1.0
    den = 1.0 + tau - nu
    if abs(den) <= DEGENERATE_TOL:
        raise DegenerateDenominator(f"nu={nu:g} degenerate: 1+tau-nu vanishes at tau={tau:g}")
    lead = (1.0 + tau) / den
    alpha = (lead, -(1.0 + tau + tau * nu) / den, tau * nu / den)
    beta = (lead, -(nu + tau * nu) / den, tau * nu / den)
    return MultistepCoeffs(alpha=alpha, beta=beta, theta=params.theta)
