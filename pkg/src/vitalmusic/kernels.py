"""Hot numeric kernels, each in a numba and a pure-numpy flavour.

The numba flavour is used when numba imports and ``VITALMUSIC_NO_NUMBA`` is
unset (or ``0``). Both flavours are always importable as
:data:`numpy_kernels` and :data:`numba_kernels` so they can be checked
against each other; ``numba_kernels`` is ``None`` when numba is missing.
"""

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is optional
    numba = None

_NJIT = dict(cache=True, nogil=True)


# ---------------------------------------------------------------------------
# numpy flavour
# ---------------------------------------------------------------------------

def _np_music_signal_power(us, a_grid, s_grid):
    """Sum over k of |a^H U_k conj(s)|^2 for every (angle, beat) grid pair.

    ``us`` is (K, Nv, Nf), ``a_grid`` (Ntheta, Nv), ``s_grid`` (Nomega, Nf).
    """
    b = us @ s_grid.conj().T                        # (K, Nv, Nomega)
    c = np.einsum("tv,kvw->ktw", a_grid.conj(), b)  # (K, Ntheta, Nomega)
    return np.sum(c.real ** 2 + c.imag ** 2, axis=0)


def _np_harmonic_residual(g, omegas, n_harmonics, sign):
    """||Z(omega)^H G||_F^2 for each omega, Z stacking harmonics 1..L."""
    m = g.shape[0]
    phase = sign * np.outer(omegas, np.arange(1, n_harmonics + 1))
    z = np.exp(1j * phase[:, :, None] * np.arange(m)[None, None, :])
    p = z.conj() @ g                                # (F, L, D)
    return np.sum(p.real ** 2 + p.imag ** 2, axis=(1, 2))


def _np_dacm_integrate(i, q):
    di = np.diff(i)
    dq = np.diff(q)
    i1 = i[1:]
    q1 = q[1:]
    inc = (i1 * dq - q1 * di) / (i1 * i1 + q1 * q1)
    out = np.empty(i.shape[0])
    out[0] = 0.0
    np.cumsum(inc, out=out[1:])
    return out


def _np_trailing_mean_subtract(x, window):
    """x[m] minus the mean of x[max(0, m-window+1):m+1] along axis 0."""
    csum = np.cumsum(x, axis=0)
    back = np.zeros_like(csum)
    back[window:] = csum[:-window]
    count = np.minimum(np.arange(1, x.shape[0] + 1), window)
    count = count.reshape((-1,) + (1,) * (x.ndim - 1))
    return x - (csum - back) / count


def _np_window_covariance(x, m):
    """Average of w w^H over newest-first windows w = [x_k, x_{k-1}, ...]."""
    windows = np.lib.stride_tricks.sliding_window_view(x, m)[:, ::-1]
    r = windows.T @ windows.conj() / windows.shape[0]
    return r


numpy_kernels = SimpleNamespace(
    name="numpy",
    music_signal_power=_np_music_signal_power,
    harmonic_residual=_np_harmonic_residual,
    dacm_integrate=_np_dacm_integrate,
    trailing_mean_subtract=_np_trailing_mean_subtract,
    window_covariance=_np_window_covariance,
)


# ---------------------------------------------------------------------------
# numba flavour
# ---------------------------------------------------------------------------

def _build_numba_kernels():
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # avoids probing an outdated system TBB on import
        numba.config.THREADING_LAYER = "workqueue"
    njit = numba.njit(**_NJIT)
    pnjit = numba.njit(parallel=True, **_NJIT)

    @njit
    def _bproj(us, s_grid):
        k_, nv, nf = us.shape
        nw = s_grid.shape[0]
        b = np.zeros((k_, nv, nw), dtype=np.complex128)
        for k in range(k_):
            for v in range(nv):
                for w in range(nw):
                    acc = 0j
                    for n in range(nf):
                        acc += us[k, v, n] * np.conj(s_grid[w, n])
                    b[k, v, w] = acc
        return b

    @pnjit
    def music_signal_power(us, a_grid, s_grid):
        b = _bproj(us, s_grid)
        k_, nv, nw = b.shape
        nt = a_grid.shape[0]
        out = np.zeros((nt, nw))
        for t in numba.prange(nt):
            for w in range(nw):
                tot = 0.0
                for k in range(k_):
                    acc = 0j
                    for v in range(nv):
                        acc += np.conj(a_grid[t, v]) * b[k, v, w]
                    tot += acc.real * acc.real + acc.imag * acc.imag
                out[t, w] = tot
        return out

    @pnjit
    def harmonic_residual(g, omegas, n_harmonics, sign):
        m, d = g.shape
        nf = omegas.shape[0]
        out = np.zeros(nf)
        for f in numba.prange(nf):
            tot = 0.0
            zc = np.empty(m, dtype=np.complex128)
            for h in range(1, n_harmonics + 1):
                step = sign * omegas[f] * h
                for i in range(m):
                    zc[i] = np.exp(-1j * i * step)
                for j in range(d):
                    acc = 0j
                    for i in range(m):
                        acc += zc[i] * g[i, j]
                    tot += acc.real * acc.real + acc.imag * acc.imag
            out[f] = tot
        return out

    @njit
    def dacm_integrate(i, q):
        n = i.shape[0]
        out = np.empty(n)
        out[0] = 0.0
        for k in range(1, n):
            di = i[k] - i[k - 1]
            dq = q[k] - q[k - 1]
            out[k] = out[k - 1] + (i[k] * dq - q[k] * di) / (i[k] * i[k] + q[k] * q[k])
        return out

    @njit
    def _trailing_2d(x, window):
        ns, nc = x.shape
        out = np.empty_like(x)
        for c in range(nc):
            run = x[0, c] * 0
            for m in range(ns):
                run += x[m, c]
                if m >= window:
                    run -= x[m - window, c]
                cnt = m + 1 if m + 1 < window else window
                out[m, c] = x[m, c] - run / cnt
        return out

    def trailing_mean_subtract(x, window):
        flat = np.ascontiguousarray(x.reshape(x.shape[0], -1))
        return _trailing_2d(flat, window).reshape(x.shape)

    @njit
    def window_covariance(x, m):
        n = x.shape[0]
        nw = n - m + 1
        r = np.zeros((m, m), dtype=np.complex128)
        for k in range(m - 1, n):
            for a in range(m):
                xa = x[k - a]
                for b in range(m):
                    r[a, b] += xa * np.conj(x[k - b])
        return r / nw

    def window_covariance_any(x, m):
        return window_covariance(np.asarray(x, dtype=np.complex128), m)

    return SimpleNamespace(
        name="numba",
        music_signal_power=music_signal_power,
        harmonic_residual=harmonic_residual,
        dacm_integrate=dacm_integrate,
        trailing_mean_subtract=trailing_mean_subtract,
        window_covariance=window_covariance_any,
    )


numba_kernels = _build_numba_kernels() if numba is not None else None


def _select():
    off = os.environ.get("VITALMUSIC_NO_NUMBA", "0").strip().lower()
    if numba_kernels is None or off not in ("", "0", "false", "no"):
        return numpy_kernels
    return numba_kernels


active = _select()
BACKEND = active.name


def music_signal_power(us, a_grid, s_grid):
    return active.music_signal_power(
        np.ascontiguousarray(us, dtype=np.complex128),
        np.ascontiguousarray(a_grid, dtype=np.complex128),
        np.ascontiguousarray(s_grid, dtype=np.complex128),
    )


def harmonic_residual(g, omegas, n_harmonics, sign=1.0):
    return active.harmonic_residual(
        np.ascontiguousarray(g, dtype=np.complex128),
        np.ascontiguousarray(omegas, dtype=np.float64),
        int(n_harmonics),
        float(sign),
    )


def dacm_integrate(i, q):
    return active.dacm_integrate(
        np.ascontiguousarray(i, dtype=np.float64),
        np.ascontiguousarray(q, dtype=np.float64),
    )


def trailing_mean_subtract(x, window):
    return active.trailing_mean_subtract(np.asarray(x), int(window))


def window_covariance(x, m):
    return active.window_covariance(np.asarray(x), int(m))
