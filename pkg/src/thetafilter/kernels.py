"""Backend selection for the hot loops.

The compiled extension is preferred; setting ``THETAFILTER_PURE_PYTHON=1``
forces the numpy fallback.  ``THETAFILTER_THREADS`` caps the threads used by
the root-modulus kernel.
"""
import os

from thetafilter import _kernels_py

if os.environ.get("THETAFILTER_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from thetafilter import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"


def default_threads() -> int:
    raw = os.environ.get("THETAFILTER_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def max_root_modulus(coeffs, z_re, z_im, lead_tol=1e-14, threads=None):
    if threads is None:
        threads = default_threads()
    return _impl.max_root_modulus(tuple(float(c) for c in coeffs), z_re, z_im, lead_tol, threads)


def linear_theta_filter(lam, forcing, y0, k, theta, nu):
    return _impl.linear_theta_filter(float(lam), forcing, float(y0), float(k), float(theta), float(nu))
