"""Harmonic MUSIC for respiration and heartbeat fundamentals, plus an FFT baseline.

Each source is modelled as ``L`` harmonics of a fundamental. A candidate
fundamental is scored by how much of its harmonic stack ``Z`` leaks into the
noise subspace ``G`` of the windowed covariance: ``||Z^H G||_F^2``. The joint
score ``1 / (||Z_r^H G||^2 + ||Z_h^H G||^2)`` separates into one search per
source, so each band is scanned on its own.
"""

import csv
import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.signal import hilbert

from . import kernels
from .errors import EstimationError

# relative eigenvalue threshold for the numerical rank check
RANK_TOL = 1e-10


@dataclass(frozen=True)
class HmusicConfig:
    """Window length, harmonic count, search bands and grid step.

    ``signal_model`` is ``"real"`` (each real harmonic spans a conjugate pair,
    plus one dimension for residual DC: ``4L + 1`` signal dimensions) or
    ``"analytic"`` (the series is made analytic first and ``2L`` dimensions
    are used).
    """

    M: int = 64
    L: int = 2
    resp_band: tuple = (0.1, 0.6)
    heart_band: tuple = (0.8, 2.0)
    grid_step: float = 0.01
    signal_model: str = "real"
    confidence_ratio: float = 5.0

    def __post_init__(self):
        object.__setattr__(self, "resp_band", tuple(float(f) for f in self.resp_band))
        object.__setattr__(self, "heart_band", tuple(float(f) for f in self.heart_band))
        if self.signal_model not in ("real", "analytic"):
            raise ValueError(f"unknown signal_model {self.signal_model!r}")
        if self.L < 1:
            raise ValueError("L must be >= 1")
        if not self.signal_dim < self.M:
            raise ValueError(f"need {self.signal_dim} signal dimensions < M = {self.M}")
        for lo, hi in (self.resp_band, self.heart_band):
            if not 0 < lo <= hi:
                raise ValueError(f"bad band ({lo}, {hi})")
        if self.resp_band[1] > self.heart_band[0]:
            raise ValueError("respiration band must end at or below the heartbeat band")
        if self.grid_step <= 0:
            raise ValueError("grid_step must be positive")

    @property
    def signal_dim(self):
        return 4 * self.L + 1 if self.signal_model == "real" else 2 * self.L

    def validate_for(self, ns, ts):
        if not 2 * self.L < self.M <= ns:
            raise ValueError(f"need 2L < M <= Ns, got L={self.L}, M={self.M}, Ns={ns}")
        nyq = 1 / (2 * ts)
        if self.L * self.heart_band[1] >= nyq:
            raise ValueError(
                f"harmonic {self.L} of {self.heart_band[1]} Hz exceeds slow-time Nyquist {nyq} Hz"
            )

    def grid(self, band):
        lo, hi = band
        n = int(np.floor((hi - lo) / self.grid_step + 1e-9))
        return np.round(lo + np.arange(n + 1) * self.grid_step, 10)


@dataclass(frozen=True)
class VitalEstimate:
    f_r_hz: float
    f_h_hz: float
    peak_value: float
    method: str
    resp_low_confidence: bool = False
    heart_low_confidence: bool = False

    @property
    def rr_bpm(self):
        return 60.0 * self.f_r_hz

    @property
    def hr_bpm(self):
        return 60.0 * self.f_h_hz

    def to_dict(self):
        d = asdict(self)
        d["rr_bpm"] = self.rr_bpm
        d["hr_bpm"] = self.hr_bpm
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class HmusicSpectrum:
    """Per-source residuals; pseudo-spectra are their reciprocals."""

    f_r_grid: np.ndarray
    resp_residual: np.ndarray
    f_h_grid: np.ndarray
    heart_residual: np.ndarray
    eigenvalues: np.ndarray

    @property
    def resp_values(self):
        return 1.0 / self.resp_residual

    @property
    def heart_values(self):
        return 1.0 / self.heart_residual

    def joint(self):
        """P(f_r, f_h) on the full 2-D grid, rows indexed by f_r."""
        return 1.0 / (self.resp_residual[:, None] + self.heart_residual[None, :])

    def to_csv(self, fh, source):
        if source == "resp":
            grid, vals, name = self.f_r_grid, self.resp_values, "f_r_hz"
        elif source == "heart":
            grid, vals, name = self.f_h_grid, self.heart_values, "f_h_hz"
        else:
            raise ValueError(f"unknown source {source!r}")
        w = csv.writer(fh)
        w.writerow([name, "value"])
        for f, v in zip(grid, vals):
            w.writerow([repr(float(f)), repr(float(v))])

    def to_long_csv(self, fh):
        """Both sources in one table: source, f_hz, value."""
        w = csv.writer(fh)
        w.writerow(["source", "f_hz", "value"])
        for name, grid, vals in (("resp", self.f_r_grid, self.resp_values),
                                 ("heart", self.f_h_grid, self.heart_values)):
            for f, v in zip(grid, vals):
                w.writerow([name, repr(float(f)), repr(float(v))])


def harmonic_matrix(omega, L, M):
    """M x L matrix whose column l is [1, e^{j l omega}, ..., e^{j (M-1) l omega}]."""
    if not 0 < omega * L < np.pi:
        raise ValueError(f"harmonic {L} of omega={omega} rad/sample is not below Nyquist")
    return np.exp(1j * omega * np.outer(np.arange(M), np.arange(1, L + 1)))


def window_covariance(x, M):
    """Average outer product of newest-first windows [x_m, x_{m-1}, ..., x_{m-M+1}]."""
    x = np.asarray(getattr(x, "values", x))
    if M > x.size:
        raise ValueError(f"window M={M} longer than series ({x.size})")
    if M < 1:
        raise ValueError("M must be positive")
    r = np.asarray(kernels.window_covariance(x.astype(np.complex128), M))
    return 0.5 * (r + r.conj().T)


def _prepare(values, cfg):
    x = np.asarray(values, dtype=float)
    x = x - x.mean()
    if cfg.signal_model == "analytic":
        return hilbert(x)
    return x.astype(np.complex128)


def noise_subspace(r, signal_dim):
    w, u = np.linalg.eigh(r)
    order = np.argsort(w)[::-1]
    w, u = w[order], u[:, order]
    return w, u[:, signal_dim:]


def source_residual(g, freqs, L, ts):
    """||Z(f)^H G||_F^2 for each candidate fundamental ``f`` (Hz).

    Windows run newest-first, so an exponential e^{j w m} shows up in them as
    the conjugate of z(w); the stack is built with negated frequencies.
    """
    omegas = 2 * np.pi * np.asarray(freqs, dtype=float) * ts
    return kernels.harmonic_residual(g, omegas, L, -1.0)


def hmusic_estimate(x, cfg=None, ts=None):
    """Jointly estimate respiration and heartbeat fundamentals.

    Parameters
    ----------
    x : PhaseSeries or array_like
        Real demodulated phase.
    cfg : HmusicConfig
    ts : float, optional
        Slow-time interval; taken from ``x.ts`` when ``x`` is a PhaseSeries.

    Returns
    -------
    VitalEstimate, HmusicSpectrum
    """
    cfg = cfg or HmusicConfig()
    ts = ts if ts is not None else x.ts
    values = np.asarray(getattr(x, "values", x), dtype=float)
    cfg.validate_for(values.size, ts)
    r = window_covariance(_prepare(values, cfg), cfg.M)
    w, g = noise_subspace(r, cfg.signal_dim)
    rank = int(np.sum(w > RANK_TOL * max(w[0], 0.0))) if w[0] > 0 else 0
    if rank < 2 * cfg.L:
        raise EstimationError(
            f"insufficient signal dimension: covariance rank {rank} < 2L = {2 * cfg.L}"
        )
    f_r = cfg.grid(cfg.resp_band)
    f_h = cfg.grid(cfg.heart_band)
    floor = np.finfo(float).eps * cfg.L * cfg.M
    res_r = np.maximum(source_residual(g, f_r, cfg.L, ts), floor)
    res_h = np.maximum(source_residual(g, f_h, cfg.L, ts), floor)
    spec = HmusicSpectrum(f_r, res_r, f_h, res_h, w)
    # separable: joint argmax = per-source argmins; argmin takes the lowest
    # frequency on exact ties
    i = int(np.argmin(res_r))
    j = int(np.argmin(res_h))
    est = VitalEstimate(
        f_r_hz=float(f_r[i]),
        f_h_hz=float(f_h[j]),
        peak_value=float(1.0 / (res_r[i] + res_h[j])),
        method="hmusic",
        resp_low_confidence=bool(_low_conf(spec.resp_values, cfg.confidence_ratio)),
        heart_low_confidence=bool(_low_conf(spec.heart_values, cfg.confidence_ratio)),
    )
    return est, spec


def _low_conf(values, ratio):
    return values.max() < ratio * np.median(values)


def fft_nfft(n):
    return max(8192, 1 << int(np.ceil(np.log2(8 * n))))


def fft_baseline(x, cfg=None, ts=None):
    """Peak of the zero-padded magnitude spectrum inside each band."""
    cfg = cfg or HmusicConfig()
    ts = ts if ts is not None else x.ts
    values = np.asarray(getattr(x, "values", x), dtype=float)
    values = values - values.mean()
    nfft = fft_nfft(values.size)
    mag = np.abs(np.fft.rfft(values, nfft))
    freqs = np.fft.rfftfreq(nfft, ts)

    def pick(band):
        sel = np.flatnonzero((freqs >= band[0] - 1e-12) & (freqs <= band[1] + 1e-12))
        if sel.size == 0:
            raise EstimationError(f"no FFT bins inside band {band}")
        k = sel[np.argmax(mag[sel])]
        return float(freqs[k]), float(mag[k]), mag[sel]

    fr, pr, mr = pick(cfg.resp_band)
    fh, ph, mh = pick(cfg.heart_band)
    return VitalEstimate(
        f_r_hz=fr,
        f_h_hz=fh,
        peak_value=ph,
        method="fft",
        resp_low_confidence=bool(_low_conf(mr, cfg.confidence_ratio)),
        heart_low_confidence=bool(_low_conf(mh, cfg.confidence_ratio)),
    )
