"""Closed-form accuracy of the filtered theta method.

Coefficients are those of the residual of the equivalent two-step method
evaluated on the exact solution, expanded about ``t_{n+1}`` in powers of the
previous step ``k_{n-1}`` (which equals ``k`` for constant steps).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from thetafilter.core import DEGENERATE_TOL, DegenerateDenominator, InvalidRatio


@dataclass(frozen=True)
class LteReport:
    """Leading local truncation error terms.

    ``c2`` multiplies ``k^2 y''``.  When it vanishes the method is second
    order and the cubic terms apply: ``c3_linear`` multiplies ``k^3 y'''`` and
    ``c3_quadratic`` multiplies ``k^3 f_y y''`` (the product of the Jacobian
    of f with ``y''``; this is ``lambda y''`` for ``y' = lambda y``).
    """

    order: int
    c2: float
    c3_linear: float = float("nan")
    c3_quadratic: float = float("nan")

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        if (self.order == 2) != (abs(self.c2) <= 1e-12):
            raise ValueError("order 2 iff c2 vanishes")


def second_order_nu(theta: float) -> float:
    """Filter parameter giving second order at constant step: ``2(2θ-1)/(2θ+1)``."""
    return 2.0 * (2.0 * theta - 1.0) / (2.0 * theta + 1.0)


def second_order_nu_variable(theta: float, tau: float) -> float:
    """Variable-step counterpart, ``τ(1+τ)(2θ-1)/(2θτ+1)``."""
    if not tau > 0:
        raise InvalidRatio(f"step ratio must be positive, got {tau}")
    return tau * (1.0 + tau) * (2.0 * theta - 1.0) / (2.0 * theta * tau + 1.0)


def implied_theta(nu: float, tau: float = 1.0) -> float:
    """Inverse of :func:`second_order_nu_variable`: the theta that makes ``nu`` second order."""
    den = 2.0 * tau * (1.0 - nu + tau)
    if abs(1.0 - nu + tau) <= DEGENERATE_TOL:
        raise DegenerateDenominator(f"nu={nu:g} equals 1+tau")
    return (nu + tau + tau * tau) / den


def lte_coefficient_constant(theta: float, nu: float) -> float:
    if abs(2.0 - nu) <= DEGENERATE_TOL:
        raise DegenerateDenominator("nu=2 degenerate")
    return 0.5 * ((3.0 * nu - 2.0) / (2.0 - nu) + 2.0 * (1.0 - theta))


def lte_coefficient_variable(theta: float, nu: float, tau: float) -> float:
    if not tau > 0:
        raise InvalidRatio(f"step ratio must be positive, got {tau}")
    den = 1.0 - nu + tau
    if abs(den) <= DEGENERATE_TOL:
        raise DegenerateDenominator(f"nu={nu:g} equals 1+tau")
    return 0.5 * ((nu + 2.0 * nu * tau - tau - tau * tau) * tau / den
                  + 2.0 * (1.0 - theta) * tau * tau)


def lte_third_order_variable(nu: float, tau: float) -> tuple[float, float]:
    """Cubic LTE coefficients ``(c3_linear, c3_quadratic)``.

    Valid only when ``nu`` is the second-order value for some theta, i.e. the
    theta returned by :func:`implied_theta`.
    """
    if not tau > 0:
        raise InvalidRatio(f"step ratio must be positive, got {tau}")
    den = 1.0 + tau - nu
    if abs(den) <= DEGENERATE_TOL:
        raise DegenerateDenominator(f"nu={nu:g} equals 1+tau")
    c3_linear = -tau * (nu * (2.0 + 3.0 * tau) + tau * tau * (tau + 1.0)) / (12.0 * den)
    c3_quadratic = -nu * tau * (nu + tau + tau * tau) * (tau + 1.0) / (4.0 * den * den)
    return c3_linear, c3_quadratic


def lte_report(theta: float, nu: float, tau: float | None = None) -> LteReport:
    """Order and leading LTE coefficients; ``tau=None`` means constant step."""
    if tau is None:
        c2 = lte_coefficient_constant(theta, nu)
        tau_eff = 1.0
    else:
        c2 = lte_coefficient_variable(theta, nu, tau)
        tau_eff = tau
    if abs(c2) > 1e-12:
        return LteReport(order=1, c2=c2)
    c3l, c3q = lte_third_order_variable(nu, tau_eff)
    return LteReport(order=2, c2=0.0, c3_linear=c3l, c3_quadratic=c3q)


def third_order_scan(nus, taus, tol: float = 1e-12) -> list[tuple[float, float]]:
    """Grid points where both cubic coefficients vanish (expected: none).

    Besides the grid test, each coefficient is zero only on explicit curves
    (``c3_quadratic``: nu = 0 or nu = -(tau + tau^2)); the linear term is
    checked on those curves too so that grid spacing cannot hide a root.
    """
    hits = []
    taus = np.asarray(list(taus), dtype=float)
    candidates = [(nu, tau) for tau in taus for nu in nus]
    for tau in taus:
        candidates.append((0.0, tau))
        candidates.append((-(tau + tau * tau), tau))
    for nu, tau in candidates:
        if abs(1.0 + tau - nu) <= DEGENERATE_TOL:
            continue
        c3l, c3q = lte_third_order_variable(float(nu), float(tau))
        if abs(c3l) <= tol and abs(c3q) <= tol:
            hits.append((float(nu), float(tau)))
    return hits
