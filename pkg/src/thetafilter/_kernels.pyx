# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops.  Signatures mirror ``_kernels_py`` exactly."""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport sqrt, hypot, fabs, copysign, INFINITY, NAN, isnan

cnp.import_array()


cdef inline void _csqrt(double x, double y, double *u, double *v) noexcept nogil:
    # principal branch
    cdef double r = hypot(x, y)
    if r == 0.0:
        u[0] = 0.0
        v[0] = 0.0
    elif x >= 0.0:
        u[0] = sqrt(0.5 * (r + x))
        v[0] = y / (2.0 * u[0])
    else:
        v[0] = copysign(sqrt(0.5 * (r - x)), y)
        u[0] = y / (2.0 * v[0])


cdef inline double _cabs_div(double nr, double ni, double dr, double di) noexcept nogil:
    cdef double dn = hypot(dr, di)
    if dn == 0.0:
        return INFINITY
    return hypot(nr, ni) / dn


cdef inline double _max_root(double r2, double r1, double r0,
                             double s2, double s1, double s0,
                             double zr, double zi, double lead_tol) noexcept nogil:
    cdef double ar = r2 - zr * s2, ai = -zi * s2
    cdef double br = r1 - zr * s1, bi = -zi * s1
    cdef double cr = r0 - zr * s0, ci = -zi * s0
    cdef double amag = hypot(ar, ai), bmag = hypot(br, bi), cmag = hypot(cr, ci)
    cdef double scale = amag
    if bmag > scale:
        scale = bmag
    if cmag > scale:
        scale = cmag
    if scale == 0.0:
        return NAN
    if amag <= lead_tol * scale:
        if bmag <= lead_tol * scale:
            return NAN if cmag <= lead_tol * scale else INFINITY
        return INFINITY
    # disc = b^2 - 4ac
    cdef double dr = br * br - bi * bi - 4.0 * (ar * cr - ai * ci)
    cdef double di = 2.0 * br * bi - 4.0 * (ar * ci + ai * cr)
    cdef double sr, si
    _csqrt(dr, di, &sr, &si)
    cdef double qr, qi
    if br * sr + bi * si >= 0.0:
        qr = -0.5 * (br + sr)
        qi = -0.5 * (bi + si)
    else:
        qr = -0.5 * (br - sr)
        qi = -0.5 * (bi - si)
    if qr == 0.0 and qi == 0.0:
        return 0.0
    cdef double m1 = _cabs_div(qr, qi, ar, ai)
    cdef double m2 = _cabs_div(cr, ci, qr, qi)
    return m1 if m1 > m2 else m2


def max_root_modulus(coeffs, z_re, z_im, double lead_tol=1e-14, int threads=1):
    """Largest |eta| solving rho(eta) - z sigma(eta) = 0 for every z sample.

    ``coeffs`` is ``(r2, r1, r0, s2, s1, s0)``.  A vanishing leading
    coefficient yields ``inf``; an identically vanishing polynomial ``nan``.
    """
    cdef double r2 = coeffs[0], r1 = coeffs[1], r0 = coeffs[2]
    cdef double s2 = coeffs[3], s1 = coeffs[4], s0 = coeffs[5]
    cdef cnp.ndarray[double, ndim=1] zr = np.ascontiguousarray(z_re, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] zi = np.ascontiguousarray(z_im, dtype=np.float64).ravel()
    if zr.shape[0] != zi.shape[0]:
        raise ValueError("z_re and z_im differ in length")
    cdef Py_ssize_t n = zr.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double[::1] xr = zr
    cdef double[::1] xi = zi
    if threads < 1:
        threads = 1
    for i in prange(n, nogil=True, num_threads=threads, schedule="static"):
        o[i] = _max_root(r2, r1, r0, s2, s1, s0, xr[i], xi[i], lead_tol)
    return out


def linear_theta_filter(double lam, forcing, double y0, double k, double theta, double nu):
    """Fixed-step filtered theta method for ``y' = lam*y + g(t)`` (scalar).

    ``forcing[n]`` holds ``g(t0 + n*k)`` for ``n = 0..N``.  The first step is an
    unfiltered theta step.  Returns ``(y, y_star)`` of length ``N + 1``.
    """
    cdef double[::1] g = np.ascontiguousarray(forcing, dtype=np.float64)
    cdef Py_ssize_t n_pts = g.shape[0], n
    if n_pts < 2:
        raise ValueError("need at least one step")
    y_arr = np.empty(n_pts, dtype=np.float64)
    ys_arr = np.empty(n_pts, dtype=np.float64)
    cdef double[::1] y = y_arr
    cdef double[::1] ys = ys_arr
    cdef double denom = 1.0 - k * theta * lam
    cdef double half = 0.5 * nu
    cdef double star
    if denom == 0.0:
        raise ZeroDivisionError("1 - k*theta*lam vanishes")
    y[0] = y0
    ys[0] = y0
    y[1] = (y0 + k * (1.0 - theta) * (lam * y0 + g[0]) + k * theta * g[1]) / denom
    ys[1] = y[1]
    with nogil:
        for n in range(1, n_pts - 1):
            star = (y[n] + k * (1.0 - theta) * (lam * y[n] + g[n]) + k * theta * g[n + 1]) / denom
            ys[n + 1] = star
            y[n + 1] = star - half * (star - 2.0 * y[n] + y[n - 1])
    return y_arr, ys_arr
