"""Pure-Python/numpy implementations of the compiled kernels.

Used when the extension is not built or ``THETAFILTER_PURE_PYTHON`` is set.
"""
import numpy as np


def max_root_modulus(coeffs, z_re, z_im, lead_tol=1e-14, threads=1):
    r2, r1, r0, s2, s1, s0 = (float(c) for c in coeffs)
    z = np.asarray(z_re, dtype=float).ravel() + 1j * np.asarray(z_im, dtype=float).ravel()
    a = r2 - z * s2
    b = r1 - z * s1
    c = r0 - z * s0
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), np.abs(c))
    s = np.sqrt(b * b - 4.0 * a * c)
    sign = np.where((b.real * s.real + b.imag * s.imag) >= 0.0, 1.0, -1.0)
    q = -0.5 * (b + sign * s)
    with np.errstate(divide="ignore", invalid="ignore"):
        m1 = np.abs(q) / np.abs(a)
        m2 = np.abs(c) / np.abs(q)
    out = np.maximum(m1, m2)
    out = np.where(q == 0, 0.0, out)
    lead_small = np.abs(a) <= lead_tol * scale
    b_small = np.abs(b) <= lead_tol * scale
    c_small = np.abs(c) <= lead_tol * scale
    out = np.where(lead_small, np.inf, out)
    out = np.where(lead_small & b_small & c_small, np.nan, out)
    out = np.where(scale == 0.0, np.nan, out)
    return out


def linear_theta_filter(lam, forcing, y0, k, theta, nu):
    g = [float(v) for v in np.asarray(forcing, dtype=float).ravel()]
    n_pts = len(g)
    if n_pts < 2:
        raise ValueError("need at least one step")
    denom = 1.0 - k * theta * lam
    if denom == 0.0:
        raise ZeroDivisionError("1 - k*theta*lam vanishes")
    half = 0.5 * nu
    y = [0.0] * n_pts
    ys = [0.0] * n_pts
    y[0] = ys[0] = float(y0)
    y[1] = ys[1] = (y0 + k * (1.0 - theta) * (lam * y0 + g[0]) + k * theta * g[1]) / denom
    for n in range(1, n_pts - 1):
        star = (y[n] + k * (1.0 - theta) * (lam * y[n] + g[n]) + k * theta * g[n + 1]) / denom
        ys[n + 1] = star
        y[n + 1] = star - half * (star - 2.0 * y[n] + y[n - 1])
    return np.array(y), np.array(ys)
