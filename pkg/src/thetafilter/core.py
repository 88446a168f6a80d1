"""Domain types and exceptions shared across the package.

All state vectors are dense float64 arrays.  Every type validates its
invariants on construction, so a value that exists is a value that is valid.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

# Norm used for EST and for every error measurement in the package.
NORM_NAME = "max"

CONSISTENCY_TOL = 1e-12
DEGENERATE_TOL = 1e-10


def norm(v) -> float:
    """Max norm of a state vector (scalars accepted)."""
    if not isinstance(v, np.ndarray):
        v = np.asarray(v, dtype=float)
    if v.size == 1:
        return abs(float(v.flat[0]))
    if v.size == 0:
        return 0.0
    return float(np.abs(v).max())


# -- exceptions ---------------------------------------------------------------

class ThetaFilterError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateDenominator(ThetaFilterError, ValueError):
    """Filter parameter hits the excluded value (nu = 2, or nu = 1 + tau)."""


class InvalidRatio(ThetaFilterError, ValueError):
    """Step ratio tau must be strictly positive."""


class NonConvergence(ThetaFilterError, ArithmeticError):
    """Newton iteration for the implicit stage did not converge."""

    def __init__(self, message: str, t: Optional[float] = None):
        super().__init__(message)
        self.t = t

    def __str__(self):
        msg = super().__str__()
        if self.t is not None:
            return f"{msg} (at t_n={self.t:.17g})"
        return msg


class SingularJacobian(NonConvergence):
    """Linearised implicit system is numerically singular."""


class SigmaVanishes(ThetaFilterError, ZeroDivisionError):
    """sigma(e^{i phi}) is zero, so the locus point is at infinity."""


class StepUnderflow(ThetaFilterError):
    """Step size controller was driven below its minimum step."""

    def __init__(self, message: str, t: Optional[float] = None):
        super().__init__(message)
        self.t = t


# -- problems -----------------------------------------------------------------

@dataclass(frozen=True)
class LinearStructure:
    """Marks a problem as affine, ``f(t, y) = matrix @ y + forcing(t)``.

    Registering this lets the stepper replace Newton by one linear solve
    (opt-in through ``NewtonConfig.linear_solve``).
    """

    matrix: np.ndarray
    forcing: Callable[[float], np.ndarray]

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float, ndmin=2)
        if m.shape[0] != m.shape[1]:
            raise ValueError("linear matrix must be square")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def _as_state(y, name: str) -> np.ndarray:
    arr = np.array(y, dtype=float, ndmin=1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D state vector")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class IvpProblem:
    """Initial value problem ``y' = rhs(t, y)``, ``y(t0) = y0`` on ``[t0, t_end]``."""

    name: str
    rhs: Callable[[float, np.ndarray], np.ndarray]
    y0: np.ndarray
    t0: float
    t_end: float
    exact: Optional[Callable[[float], np.ndarray]] = None
    jac: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    linear: Optional[LinearStructure] = None
    invariant: Optional[Callable[[np.ndarray], float]] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        y0 = _as_state(self.y0, "y0")
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "t_end", float(self.t_end))
        if y0.size < 1:
            raise ValueError("dim must be >= 1")
        if not self.t0 < self.t_end:
            raise ValueError(f"need t0 < t_end, got {self.t0} >= {self.t_end}")
        f0 = np.asarray(self.rhs(self.t0, y0.copy()), dtype=float)
        if f0.shape != y0.shape:
            raise ValueError(f"rhs returned shape {f0.shape}, expected {y0.shape}")
        if self.exact is not None:
            e0 = np.asarray(self.exact(self.t0), dtype=float)
            if e0.shape != y0.shape or norm(e0 - y0) > 1e-12:
                raise ValueError("exact(t0) does not match y0")
        if self.linear is not None and self.linear.matrix.shape != (y0.size, y0.size):
            raise ValueError("linear structure has the wrong dimension")

    @property
    def dim(self) -> int:
        return int(self.y0.size)

    def f(self, t: float, y: np.ndarray) -> np.ndarray:
        return np.asarray(self.rhs(t, y), dtype=float)


# -- method parameters ----------------------------------------------------------

class StepMode(enum.Enum):
    CONSTANT = "constant"
    VARIABLE = "variable"


@dataclass(frozen=True)
class MethodParams:
    """theta of Step 1, nu of the filter, and the step mode.

    Variable mode can only check ``nu != 1 + tau`` once tau is known, which
    happens at step time.
    """

    theta: float
    nu: float
    step_mode: StepMode = StepMode.CONSTANT

    def __post_init__(self):
        theta, nu = float(self.theta), float(self.nu)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "nu", nu)
        if not (0.0 <= theta <= 1.0):
            raise ValueError(f"theta must lie in [0, 1], got {theta}")
        if not np.isfinite(nu):
            raise ValueError("nu must be finite")
        if self.step_mode is StepMode.CONSTANT and abs(2.0 - nu) <= DEGENERATE_TOL:
            raise DegenerateDenominator(f"nu={nu:g} degenerate: constant-step filter needs nu != 2")

    @property
    def variable(self) -> bool:
        return self.step_mode is StepMode.VARIABLE


# -- trajectories -------------------------------------------------------------

@dataclass(frozen=True)
class StepRecord:
    """One accepted state.

    ``k`` is the step that produced this state (``t_n - t_{n-1}``); the
    initial record carries the size of the first step instead.  ``y`` is the
    filtered value, ``y_star`` the unfiltered one.
    """

    t: float
    k: float
    y: np.ndarray
    y_star: np.ndarray
    est: float
    newton_iters: int = 0

    def __post_init__(self):
        y = _as_state(self.y, "y")
        ys = _as_state(self.y_star, "y_star")
        if y.shape != ys.shape:
            raise ValueError("y and y_star differ in shape")
        if not self.k > 0:
            raise ValueError(f"step size must be positive, got {self.k}")
        if self.newton_iters < 0:
            raise ValueError("newton_iters must be non-negative")
        est = float(self.est)
        if est < 0 or abs(est - norm(y - ys)) > 1e-12 * (1.0 + est):
            raise ValueError("est must equal norm(y - y_star)")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "y_star", ys)
        object.__setattr__(self, "est", est)


@dataclass(frozen=True)
class Trajectory:
    records: tuple
    problem_id: str
    params: Optional[MethodParams] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        recs = tuple(self.records)
        if not recs:
            raise ValueError("empty trajectory")
        ts = np.array([r.t for r in recs])
        if np.any(np.diff(ts) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        object.__setattr__(self, "records", recs)

    def __len__(self):
        return len(self.records)

    @property
    def t(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    @property
    def y(self) -> np.ndarray:
        return np.array([r.y for r in self.records])

    @property
    def y_star(self) -> np.ndarray:
        return np.array([r.y_star for r in self.records])

    @property
    def k(self) -> np.ndarray:
        return np.array([r.k for r in self.records])

    @property
    def est(self) -> np.ndarray:
        return np.array([r.est for r in self.records])

    @property
    def n_steps(self) -> int:
        return len(self.records) - 1

    @property
    def final(self) -> StepRecord:
        return self.records[-1]


# -- multistep representation -------------------------------------------------

@dataclass(frozen=True)
class MultistepCoeffs:
    """Coefficients of the equivalent two-step method

    ``a2 y_{n+1} + a1 y_n + a0 y_{n-1} = k (1-theta) f_n
    + k theta f(t_{n+1}, b2 y_{n+1} + b1 y_n + b0 y_{n-1})``.
    """

    alpha: tuple
    beta: tuple
    theta: float

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        beta = tuple(float(b) for b in self.beta)
        if len(alpha) != 3 or len(beta) != 3:
            raise ValueError("need exactly three alpha and three beta coefficients")
        if abs(sum(alpha)) > CONSISTENCY_TOL * max(1.0, max(abs(a) for a in alpha)):
            raise ValueError(f"alpha does not sum to zero: {alpha}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "theta", float(self.theta))

    def residual(self, f: Callable, t_n: float, k: float, y_next, y_n, y_nm1) -> np.ndarray:
        """Residual of the two-step relation for the given three states."""
        a2, a1, a0 = self.alpha
        b2, b1, b0 = self.beta
        y_next, y_n, y_nm1 = (np.asarray(v, dtype=float) for v in (y_next, y_n, y_nm1))
        lhs = a2 * y_next + a1 * y_n + a0 * y_nm1
        implicit_arg = b2 * y_next + b1 * y_n + b0 * y_nm1
        rhs = k * (1.0 - self.theta) * f(t_n, y_n) + k * self.theta * f(t_n + k, implicit_arg)
        return lhs - rhs
