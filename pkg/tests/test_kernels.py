"""The numba and numpy kernel flavours against each other and against loops."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vitalmusic import kernels


def _crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_backend_selection_env(monkeypatch):
    monkeypatch.setenv("VITALMUSIC_NO_NUMBA", "1")
    assert kernels._select() is kernels.numpy_kernels
    monkeypatch.setenv("VITALMUSIC_NO_NUMBA", "0")
    expected = kernels.numba_kernels or kernels.numpy_kernels
    assert kernels._select() is expected


def test_music_signal_power(flavour):
    rng = np.random.default_rng(0)
    us = _crandn(rng, 2, 3, 5)
    a = _crandn(rng, 4, 3)
    s = _crandn(rng, 6, 5)
    got = flavour.music_signal_power(us, a, s)
    want = np.zeros((4, 6))
    for t in range(4):
        for w in range(6):
            v = np.kron(a[t], s[w])
            for k in range(2):
                want[t, w] += abs(np.vdot(v, us[k].ravel())) ** 2
    np.testing.assert_allclose(got, want, rtol=1e-12)


@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_harmonic_residual(flavour, sign):
    rng = np.random.default_rng(1)
    g = _crandn(rng, 12, 5)
    om = np.array([0.1, 0.37, 0.9])
    got = flavour.harmonic_residual(g, om, 3, sign)
    for i, w in enumerate(om):
        z = np.exp(1j * sign * w * np.outer(np.arange(12), np.arange(1, 4)))
        assert got[i] == pytest.approx(np.linalg.norm(z.conj().T @ g) ** 2, rel=1e-12)


def test_dacm_integrate(flavour):
    rng = np.random.default_rng(2)
    i, q = rng.standard_normal(50) + 3, rng.standard_normal(50)
    got = flavour.dacm_integrate(i, q)
    acc = [0.0]
    for k in range(1, 50):
        acc.append(acc[-1] + (i[k] * (q[k] - q[k - 1]) - q[k] * (i[k] - i[k - 1])) / (i[k] ** 2 + q[k] ** 2))
    np.testing.assert_allclose(got, acc, rtol=1e-12, atol=1e-14)


@given(st.integers(1, 12), st.integers(1, 30))
@settings(max_examples=40, deadline=None)
def test_trailing_mean_subtract(window, n):
    window = min(window, n)
    rng = np.random.default_rng(window * 100 + n)
    x = _crandn(rng, n, 2, 3)
    want = np.empty_like(x)
    for m in range(n):
        want[m] = x[m] - x[max(0, m - window + 1):m + 1].mean(axis=0)
    for fl in [kernels.numpy_kernels, kernels.numba_kernels]:
        if fl is None:
            continue
        np.testing.assert_allclose(fl.trailing_mean_subtract(x, window), want, atol=1e-12)


def test_window_covariance(flavour):
    rng = np.random.default_rng(3)
    x = _crandn(rng, 20)
    m = 6
    want = np.zeros((m, m), complex)
    for k in range(m - 1, 20):
        w = x[k - np.arange(m)]
        want += np.outer(w, w.conj())
    want /= 20 - m + 1
    np.testing.assert_allclose(flavour.window_covariance(x, m), want, atol=1e-12)


def test_flavours_agree_on_large_inputs():
    if kernels.numba_kernels is None:
        pytest.skip("numba not installed")
    rng = np.random.default_rng(4)
    us = _crandn(rng, 1, 8, 240)
    a = _crandn(rng, 121, 8)
    s = _crandn(rng, 200, 240)
    np.testing.assert_allclose(kernels.numba_kernels.music_signal_power(us, a, s),
                               kernels.numpy_kernels.music_signal_power(us, a, s), rtol=1e-10)
    g = _crandn(rng, 64, 55)
    om = np.linspace(0.01, 0.6, 101)
    np.testing.assert_allclose(kernels.numba_kernels.harmonic_residual(g, om, 2, -1.0),
                               kernels.numpy_kernels.harmonic_residual(g, om, 2, -1.0), rtol=1e-10)
