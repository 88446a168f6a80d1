"""Stability analysis of the equivalent two-step method.

For ``y' = lambda y`` and ``z = k lambda`` a filtered step obeys
``rho(E) y = z sigma(E) y`` with

    rho(eta)   = a2 eta^2 + a1 eta + a0
    sigma(eta) = theta b2 eta^2 + (1 - theta + theta b1) eta + theta b0

Three independent routes decide A-stability and are kept separate on
purpose: explicit inequalities in ``nu`` (:func:`is_a_stable`), Dahlquist's
``(a, b, c)`` parameters computed from the polynomial coefficients
(:func:`dahlquist_abc`), and brute-force root sampling
(:func:`a_stability_oracle`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from thetafilter import kernels
from thetafilter.core import (
    DEGENERATE_TOL,
    DegenerateDenominator,
    MethodParams,
    SigmaVanishes,
    StepMode,
    ThetaFilterError,
)
from thetafilter.stepper import multistep_coeffs

UNIT_TOL = 1e-9
PREDICATE_TOL = 1e-12
SIGMA_TOL = 1e-8


@dataclass(frozen=True)
class CharacteristicPolys:
    """Coefficients, highest degree first."""

    rho: tuple
    sigma: tuple

    def __post_init__(self):
        rho = tuple(float(c) for c in self.rho)
        sigma = tuple(float(c) for c in self.sigma)
        if abs(sum(rho)) > 1e-12 * max(1.0, max(abs(c) for c in rho)):
            raise ValueError("rho(1) must vanish")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "sigma", sigma)

    def rho_at(self, eta):
        return np.polyval(self.rho, eta)

    def sigma_at(self, eta):
        return np.polyval(self.sigma, eta)

    @property
    def coeffs(self) -> tuple:
        return self.rho + self.sigma


@dataclass(frozen=True)
class DahlquistParams:
    """Dahlquist's parameters after normalising to ``rho'(1) = sigma(1) = 1``.

    ``scale`` is ``rho'(1) / sigma(1)`` before normalisation.  A non-positive
    scale means the frozen method integrates the wrong direction of time
    and cannot be A-stable.
    """

    a: float
    b: float
    c: float
    scale: float

    def is_a_stable(self, tol: float = PREDICATE_TOL) -> bool:
        if not self.scale > 0:
            return False
        return self.a >= -tol and self.b >= -tol and self.c >= -tol


@dataclass(frozen=True)
class LocusCurve:
    phi: np.ndarray
    z: np.ndarray

    @property
    def samples(self):
        return list(zip(self.phi.tolist(), self.z.tolist()))


@dataclass(frozen=True)
class RegionGrid:
    """``stable[i, j]`` refers to ``z = re[i] + 1j * im[j]``."""

    re_range: tuple
    im_range: tuple
    nx: int
    ny: int
    stable: np.ndarray
    max_modulus: np.ndarray

    def __post_init__(self):
        if self.stable.shape != (self.nx, self.ny):
            raise ValueError("stable matrix does not match grid size")

    @property
    def re(self) -> np.ndarray:
        return np.linspace(self.re_range[0], self.re_range[1], self.nx)

    @property
    def im(self) -> np.ndarray:
        return np.linspace(self.im_range[0], self.im_range[1], self.ny)


def characteristic_polys(params: MethodParams, tau: float = 1.0) -> CharacteristicPolys:
    mc = multistep_coeffs(params, tau)
    th = params.theta
    b2, b1, b0 = mc.beta
    return CharacteristicPolys(rho=mc.alpha, sigma=(th * b2, 1.0 - th + th * b1, th * b0))


def _tau_of(params: MethodParams, tau: float) -> float:
    return float(tau) if params.step_mode is StepMode.VARIABLE else 1.0


def zero_stability_roots(params: MethodParams, tau: float = 1.0) -> tuple[float, float]:
    """Roots of rho: the principal root 1 and the filter root ``tau nu / (1 + tau)``."""
    tau = _tau_of(params, tau)
    return 1.0, tau * params.nu / (1.0 + tau)


def is_zero_stable(params: MethodParams, tau: float = 1.0) -> bool:
    """Root condition on rho.  A degenerate ``nu = 1 + tau`` is reported unstable."""
    tau = _tau_of(params, tau)
    nu = params.nu
    if abs(1.0 + tau - nu) <= DEGENERATE_TOL:
        return False
    bound = (1.0 + tau) / tau
    return -bound <= nu < bound


def _constant_a_stable(theta: float, nu: float, tol: float) -> bool:
    if theta < 0.5:
        return False
    s = (2.0 * theta + 1.0) * nu
    return 2.0 - 4.0 * theta - tol <= s <= 4.0 * theta - 2.0 + tol


def _variable_conditions(theta: float, nu: float, tau: float):
    s = 1.0 + tau
    lower_c = 1.0 + tau + tau * nu
    lower_b = (2.0 * theta - 1.0) * s + nu * (1.0 + 2.0 * theta * tau)
    quad = (tau * (2.0 * theta * tau + 1.0) * nu * nu
            + s * (1.0 - tau - 4.0 * theta * tau) * nu
            + s * s * (2.0 * theta - 1.0))
    return lower_c, lower_b, quad


def _variable_a_stable(theta: float, nu: float, tau: float, tol: float) -> bool:
    # Dahlquist's conditions once rho'(1) = sigma(1) = 1, cleared of the
    # positive denominators (1+tau-nu) and (1+tau-tau*nu).
    s = 1.0 + tau
    if s - nu <= DEGENERATE_TOL or s - tau * nu <= DEGENERATE_TOL:
        return False
    lower_c, lower_b, quad = _variable_conditions(theta, nu, tau)
    return lower_c >= -tol * s and lower_b >= -tol * s and quad >= -tol * s * s


def is_a_stable(params: MethodParams, tau: float = 1.0, tol: float = PREDICATE_TOL) -> bool:
    """Closed-form A-stability test.

    Constant step: ``theta >= 1/2`` and ``2 - 4 theta <= (2 theta + 1) nu <=
    4 theta - 2``, equivalently ``|nu| <= 2 (2 theta - 1)/(2 theta + 1)``.

    Variable step (frozen ratio ``tau``): with ``s = 1 + tau``, both
    ``s - nu`` and ``s - tau nu`` positive, and

        1 + tau + tau nu >= 0
        (2 theta - 1) s + nu (1 + 2 theta tau) >= 0
        tau (2 theta tau + 1) nu^2 + s (1 - tau - 4 theta tau) nu
            + s^2 (2 theta - 1) >= 0

    At ``tau = 1`` this reduces to the constant-step interval.
    """
    if params.step_mode is StepMode.VARIABLE:
        return _variable_a_stable(params.theta, params.nu, float(tau), tol)
    return _constant_a_stable(params.theta, params.nu, tol)


def a_stable_nu_intervals(theta: float, tau: float = 1.0) -> list[tuple[float, float]]:
    """Maximal ``nu`` intervals on which the frozen-``tau`` method is A-stable.

    Endpoints are closed-form (roots of the quadratic condition, the linear
    bounds and the singular values ``1 + tau``, ``(1 + tau)/tau``); which
    segments are admissible is read off at their midpoints.
    """
    s = 1.0 + tau
    cands = {-s / tau, (1.0 - 2.0 * theta) * s / (1.0 + 2.0 * theta * tau), s, s / tau}
    qa = tau * (2.0 * theta * tau + 1.0)
    qb = s * (1.0 - tau - 4.0 * theta * tau)
    qc = s * s * (2.0 * theta - 1.0)
    disc = qb * qb - 4.0 * qa * qc
    if disc >= 0:
        r = math.sqrt(disc)
        cands.update({(-qb - r) / (2.0 * qa), (-qb + r) / (2.0 * qa)})
    pts = sorted(cands)
    lo_edge, hi_edge = pts[0] - 1.0, pts[-1] + 1.0
    grid = [lo_edge] + pts + [hi_edge]

    def ok(nu):
        return _variable_a_stable(theta, nu, tau, PREDICATE_TOL)

    intervals: list[list[float]] = []
    for left, right in zip(grid[:-1], grid[1:]):
        if right - left < 1e-15 or not ok(0.5 * (left + right)):
            continue
        if intervals and abs(intervals[-1][1] - left) <= 1e-15 and ok(left):
            intervals[-1][1] = right
        else:
            intervals.append([left, right])
    return [(lo, hi) for lo, hi in intervals if lo > lo_edge and hi < hi_edge]


def variable_bound_curves(theta: float, tau: float) -> tuple[float, float, float]:
    """The three linear-fractional curves in ``(tau, nu)`` that bound A-stability
    when the Dahlquist conditions are applied without normalising ``rho'(1)``:
    lower ``(1-2θ)(1+τ)/(1+2θτ)``, upper ``(2θ-1)(1+τ)/((1+2θ)τ)``, and ``1+τ``.

    The lower curve and ``1 + tau`` are exact; the upper curve is exact only
    at ``tau = 1`` (compare :func:`a_stable_nu_intervals`).
    """
    lower = (1.0 - 2.0 * theta) * (1.0 + tau) / (1.0 + 2.0 * theta * tau)
    upper = (2.0 * theta - 1.0) * (1.0 + tau) / ((1.0 + 2.0 * theta) * tau)
    return lower, upper, 1.0 + tau


def dahlquist_abc(polys: CharacteristicPolys) -> DahlquistParams:
    """Dahlquist's ``(a, b, c)`` from the polynomial coefficients.

    After scaling rho by ``rho'(1)`` and sigma by ``sigma(1)`` (a positive
    rescaling of z, so the left half-plane is preserved):
    ``c = -alpha_1``, ``b = 1 - 2 sigma_1``, ``a + c = 2 (sigma_2 - sigma_0)``.
    """
    r2, r1, r0 = polys.rho
    s2, s1, s0 = polys.sigma
    drho = 2.0 * r2 + r1
    ssum = s2 + s1 + s0
    if abs(drho) <= 1e-14 or abs(ssum) <= 1e-14:
        return DahlquistParams(a=math.nan, b=math.nan, c=math.nan, scale=0.0)
    r1n = r1 / drho
    s2n, s1n, s0n = s2 / ssum, s1 / ssum, s0 / ssum
    c = -r1n
    b = 1.0 - 2.0 * s1n
    a = 2.0 * (s2n - s0n) - c
    return DahlquistParams(a=a, b=b, c=c, scale=drho / ssum)


def boundary_locus(params: MethodParams, phi: float) -> complex:
    """Closed-form ``rho(e^{i phi}) / sigma(e^{i phi})`` for constant steps.

    Raises :class:`SigmaVanishes` where the point lies at infinity.
    """
    if params.step_mode is not StepMode.CONSTANT:
        raise ValueError("closed-form locus is for constant steps; use boundary_locus_direct")
    polys = characteristic_polys(params)
    if abs(polys.sigma_at(np.exp(1j * phi))) <= SIGMA_TOL:
        raise SigmaVanishes(f"sigma vanishes at phi={phi:g}")
    th, nu = params.theta, params.nu
    cphi, sphi = math.cos(phi), math.sin(phi)
    big_a = 2.0 - nu - th * (2.0 + nu)
    den = ((2.0 * th * math.cos(2.0 * phi) + big_a * cphi + nu * th) ** 2
           + (2.0 * th * math.sin(2.0 * phi) + big_a * sphi) ** 2)
    re = (4.0 * (2.0 * th - 1.0) + nu * nu * (2.0 * th + 1.0) - 8.0 * nu * th * cphi) * (1.0 - cphi) / den
    im = (2.0 - nu) ** 2 * sphi / den
    return complex(re, im)


def boundary_locus_direct(params: MethodParams, phi: float, tau: float = 1.0) -> complex:
    polys = characteristic_polys(params, tau)
    zeta = complex(math.cos(phi), math.sin(phi))
    sig = polys.sigma_at(zeta)
    if abs(sig) <= SIGMA_TOL:
        raise SigmaVanishes(f"sigma vanishes at phi={phi:g}")
    return complex(polys.rho_at(zeta) / sig)


def locus_curve(params: MethodParams, n: int = 720, tau: float = 1.0) -> LocusCurve:
    """Boundary locus sampled at ``phi = 2 pi j / n``; points at infinity are dropped."""
    phis, zs = [], []
    for j in range(n):
        phi = 2.0 * math.pi * j / n
        try:
            if params.step_mode is StepMode.CONSTANT:
                z = boundary_locus(params, phi)
            else:
                z = boundary_locus_direct(params, phi, tau)
        except SigmaVanishes:
            continue
        phis.append(phi)
        zs.append(z)
    return LocusCurve(phi=np.array(phis), z=np.array(zs, dtype=complex))


def real_axis_crossing(theta: float, nu: float) -> float:
    """Real part of the locus at ``phi = pi``: ``2(2+nu) / ((2θ+1)nu + 2(2θ-1))``."""
    den = (2.0 * theta + 1.0) * nu + 2.0 * (2.0 * theta - 1.0)
    if den == 0.0:
        return math.inf
    return 2.0 * (2.0 + nu) / den


def is_a0_stable(theta: float, nu: float) -> bool:
    """A0-stability from the sign of the locus crossing at ``phi = pi``.

    When the crossing sits at infinity (``(2θ+1)nu + 2(2θ-1) = 0``) the sign
    test is inconclusive and the negative real axis is sampled instead.
    """
    den = (2.0 * theta + 1.0) * nu + 2.0 * (2.0 * theta - 1.0)
    if abs(den) > 1e-12:
        return den > 0.0
    return a0_stability_oracle(MethodParams(theta, nu))


def _sample_modulus(params: MethodParams, tau: float, z: np.ndarray, threads=None) -> np.ndarray:
    polys = characteristic_polys(params, tau)
    mod = kernels.max_root_modulus(polys.coeffs, z.real, z.imag, threads=threads)
    if np.any(np.isnan(mod)):
        raise ThetaFilterError("rho - z sigma vanishes identically at a sampled z")
    return mod


def _log_radial(n_samples: int, ang_lo: float, ang_hi: float):
    n_ang = max(8, int(round(math.sqrt(n_samples))))
    n_rad = max(8, n_samples // n_ang)
    radii = np.logspace(-6.0, 6.0, n_rad)
    ang = np.linspace(ang_lo, ang_hi, n_ang)
    return (radii[:, None] * np.exp(1j * ang)[None, :]).ravel(), radii


def a_stability_oracle(params: MethodParams, tau: float = 1.0, n_samples: int = 10_000,
                       threads=None) -> bool:
    """Brute-force A-stability: every sampled ``z`` with ``Re z <= 0``,
    ``|z| <= 1e6`` must give roots with ``|eta| <= 1 + 1e-9``.

    Samples are a log-radial grid over the closed left half-plane plus a
    dense sweep of the imaginary axis.
    """
    tau = _tau_of(params, tau)
    try:
        characteristic_polys(params, tau)
    except DegenerateDenominator:
        return False
    z, radii = _log_radial(n_samples, 0.5 * math.pi, 1.5 * math.pi)
    axis = np.concatenate([radii, -radii, np.linspace(-50.0, 50.0, 2001)])
    z = np.concatenate([z, 1j * axis, [0.0]])
    z = np.where(z.real > 0, 1j * z.imag, z)  # cos(pi/2) round-off
    return bool(np.all(_sample_modulus(params, tau, z, threads) <= 1.0 + UNIT_TOL))


def a0_stability_oracle(params: MethodParams, tau: float = 1.0, n_samples: int = 4000,
                        threads=None) -> bool:
    """Sampled check that the negative real axis lies in the stability region."""
    tau = _tau_of(params, tau)
    x = np.concatenate([-np.logspace(-6.0, 6.0, n_samples), [0.0]])
    return bool(np.all(_sample_modulus(params, tau, x.astype(complex), threads) <= 1.0 + UNIT_TOL))


def wedge_stable(params: MethodParams, alpha: float = math.pi / 4, tau: float = 1.0,
                 n_samples: int = 10_000, threads=None) -> bool:
    """Sampled A(alpha) check: all z with ``|arg(-z)| <= alpha`` stable.

    Best-effort utility only; no closed form is known for this family.
    """
    tau = _tau_of(params, tau)
    z, _ = _log_radial(n_samples, math.pi - alpha, math.pi + alpha)
    return bool(np.all(_sample_modulus(params, tau, z, threads) <= 1.0 + UNIT_TOL))


def leftmost_stable_real(params: MethodParams, x_min: float = -100.0, n: int = 100_001,
                         tau: float = 1.0) -> float:
    """Left end of the stable real segment that touches the origin.

    Returns ``x_min`` if the whole sampled segment is stable and ``0.0`` if
    no negative sample is stable.
    """
    tau = _tau_of(params, tau)
    x = np.linspace(0.0, x_min, n)
    stable = _sample_modulus(params, tau, x.astype(complex)) <= 1.0 + UNIT_TOL
    if stable[1:].all():
        return float(x_min)
    first_bad = int(np.argmin(stable[1:])) + 1
    return float(x[first_bad - 1])


def region_raster(params: MethodParams, re_range=(-5.0, 5.0), im_range=(-5.0, 5.0),
                  nx: int = 201, ny: int = 201, tau: float = 1.0, threads=None) -> RegionGrid:
    """Rasterised stability region on an ``nx`` by ``ny`` grid (closed boundary)."""
    if nx < 2 or ny < 2:
        raise ValueError("raster needs nx, ny >= 2")
    if not (re_range[0] < re_range[1] and im_range[0] < im_range[1]):
        raise ValueError("ranges must be increasing")
    tau = _tau_of(params, tau)
    re = np.linspace(re_range[0], re_range[1], nx)
    im = np.linspace(im_range[0], im_range[1], ny)
    zr, zi = np.meshgrid(re, im, indexing="ij")
    mod = _sample_modulus(params, tau, (zr + 1j * zi).ravel(), threads).reshape(nx, ny)
    return RegionGrid(re_range=tuple(map(float, re_range)), im_range=tuple(map(float, im_range)),
                      nx=nx, ny=ny, stable=mod <= 1.0 + UNIT_TOL, max_modulus=mod)
