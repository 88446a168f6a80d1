"""Test problems: Lorenz, a long pendulum, and a stiff scalar linear test."""
from __future__ import annotations

import math

import numpy as np

from thetafilter.core import IvpProblem, LinearStructure

PENDULUM_G = 9.8
PENDULUM_L = 49.0


def lorenz(t_end: float = 5.0) -> IvpProblem:
    """Lorenz system with sigma = 10, r = 28, b = 8/3, started from (0, 1, 0)."""

    def rhs(t, y):
        x, yy, z = y
        return np.array([10.0 * (yy - x), -x * z + 28.0 * x - yy, x * yy - (8.0 / 3.0) * z])

    def jac(t, y):
        x, yy, z = y
        return np.array([[-10.0, 10.0, 0.0],
                         [28.0 - z, -1.0, -x],
                         [yy, x, -8.0 / 3.0]])

    return IvpProblem(name="lorenz", rhs=rhs, y0=(0.0, 1.0, 0.0), t0=0.0, t_end=t_end, jac=jac)


def pendulum_energy(y, g: float = PENDULUM_G, length: float = PENDULUM_L) -> float:
    """``v^2/2 + g L (1 - cos angle)``, conserved along exact solutions."""
    angle, v = y[0], y[1]
    return 0.5 * v * v + g * length * (1.0 - math.cos(angle))


def pendulum(t_end: float = 50.0) -> IvpProblem:
    """Pendulum in (angle, arc velocity): ``angle' = v / L``, ``v' = -g sin(angle)``."""
    g, length = PENDULUM_G, PENDULUM_L

    def rhs(t, y):
        return np.array([y[1] / length, -g * math.sin(y[0])])

    def jac(t, y):
        return np.array([[0.0, 1.0 / length], [-g * math.cos(y[0]), 0.0]])

    return IvpProblem(
        name="pendulum", rhs=rhs, y0=(0.9 * math.pi, 0.0), t0=0.0, t_end=t_end, jac=jac,
        invariant=lambda y: pendulum_energy(y, g, length),
        meta={"g": g, "L": length, "default_k": 0.1, "energy_scale": g * length},
    )


def linear_test(lam: float, t_end: float = 1.0) -> IvpProblem:
    """``y' = lam (y - sin t) + cos t``, ``y(0) = 1``; exact ``e^{lam t} + sin t``."""
    lam = float(lam)

    def rhs(t, y):
        return lam * (y - math.sin(t)) + math.cos(t)

    return IvpProblem(
        name="linear", rhs=rhs, y0=(1.0,), t0=0.0, t_end=t_end,
        exact=lambda t: np.array([math.exp(lam * t) + math.sin(t)]),
        jac=lambda t, y: np.array([[lam]]),
        linear=LinearStructure(matrix=[[lam]], forcing=lambda t: np.array([-lam * math.sin(t) + math.cos(t)])),
        meta={"lambda": lam},
    )


PROBLEM_NAMES = ("lorenz", "pendulum", "linear")


def get_problem(name: str, lam: float = -10.0, t_end: float | None = None) -> IvpProblem:
    kw = {} if t_end is None else {"t_end": t_end}
    if name == "lorenz":
        return lorenz(**kw)
    if name == "pendulum":
        return pendulum(**kw)
    if name == "linear":
        return linear_test(lam, **kw)
    raise KeyError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}")
