import numpy as np
import pytest

from thetafilter import _kernels_py, kernels

compiled = pytest.importorskip("thetafilter._kernels")

COEFFS = [
    (1.0, -1.0, 0.0, 1.0, 0.0, 0.0),          # backward Euler
    (1.0, -1.0, 0.0, 0.5, 0.5, 0.0),          # trapezoid
    (1.5, -2.0, 0.5, 1.5, -1.0, 0.5),         # filtered BE, nu = 2/3
    (1.0, -1.0, 0.0, 0.0, 1.0, 0.0),          # forward Euler: degree drops for all z
]


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("coeffs", COEFFS)
def test_root_modulus_agrees(coeffs):
    rng = np.random.default_rng(7)
    zr = rng.normal(scale=30.0, size=5000)
    zi = rng.normal(scale=30.0, size=5000)
    a = compiled.max_root_modulus(coeffs, zr, zi, 1e-14, 2)
    b = _kernels_py.max_root_modulus(coeffs, zr, zi, 1e-14, 1)
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_root_modulus_against_numpy_roots():
    coeffs = COEFFS[2]
    z = np.array([-3 + 2j, 0.5j, -100.0, 1e6j])
    got = kernels.max_root_modulus(coeffs, z.real, z.imag)
    r, s = np.array(coeffs[:3]), np.array(coeffs[3:])
    for zz, g in zip(z, got):
        assert g == pytest.approx(np.max(np.abs(np.roots(r - zz * s))), rel=1e-10)


def test_root_modulus_degenerate_cases():
    # leading coefficient cancels at z = 1: missing root at infinity
    out = kernels.max_root_modulus(COEFFS[0], np.array([1.0]), np.array([0.0]))
    assert np.isinf(out[0])
    out = kernels.max_root_modulus((0.0,) * 6, np.array([1.0]), np.array([0.0]))
    assert np.isnan(out[0])


def test_threads_do_not_change_result():
    zr = np.linspace(-10, 10, 10001)
    zi = np.linspace(-5, 5, 10001)
    a = compiled.max_root_modulus(COEFFS[2], zr, zi, 1e-14, 1)
    b = compiled.max_root_modulus(COEFFS[2], zr, zi, 1e-14, 4)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("theta,nu", [(0.5, 0.0), (1.0, 2.0 / 3.0), (0.0, -2.0), (0.75, 0.4)])
def test_linear_filter_kernel_agrees(theta, nu):
    t = np.linspace(0.0, 1.0, 401)
    g = 10.0 * np.sin(t) + np.cos(t)
    a = compiled.linear_theta_filter(-10.0, g, 1.0, t[1], theta, nu)
    b = _kernels_py.linear_theta_filter(-10.0, g, 1.0, t[1], theta, nu)
    for u, v in zip(a, b):
        np.testing.assert_allclose(u, v, rtol=1e-13, atol=1e-15)


def test_environment_forces_fallback():
    import os
    import subprocess
    import sys
    env = dict(os.environ, THETAFILTER_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import thetafilter.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True).stdout
    assert out.strip() == "python"


def test_thread_count_from_environment(monkeypatch):
    monkeypatch.setenv("THETAFILTER_THREADS", "3")
    assert kernels.default_threads() == 3
    monkeypatch.setenv("THETAFILTER_THREADS", "zero")
    assert kernels.default_threads() >= 1
