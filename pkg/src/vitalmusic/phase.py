"""Phase extraction at the located range-azimuth cell.

Each frame is collapsed onto the target's fast-time and array responses,
the residual DC offset is removed by a circle fit in the IQ plane, and the
phase is demodulated with DACM.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EstimationError
from .radar import angle_steering, range_steering


@dataclass(frozen=True)
class IqSeries:
    values: np.ndarray  # complex, one per frame
    omega_b: float
    theta: float


@dataclass(frozen=True)
class PhaseSeries:
    values: np.ndarray  # rad
    ts: float

    @property
    def t(self):
        return np.arange(self.values.size) * self.ts

    def to_csv(self, fh):
        fh.write("t_s,phase_rad\n")
        for t, v in zip(self.t, self.values):
            fh.write(f"{float(t)!r},{float(v)!r}\n")


def collapse_fast_time(cube, omega_b):
    """Least-squares amplitude per antenna: u_m = Y_m conj(s(omega_b)) / Nf.

    Returns an (frames, Nv) complex array. The conjugate on the steering
    vector is what the least-squares solution actually requires.
    """
    cfg = cube.config
    nyq = np.pi / cfg.tf
    if not 0 <= omega_b < 2 * nyq:
        raise ValueError(f"omega_b {omega_b} outside the fast-time band")
    s = range_steering(omega_b, cfg.tf, cfg.nf)
    return cube.data @ s.conj() / cfg.nf


def collapse_antennas(u, theta, omega_b=float("nan"), d_over_lambda=0.5):
    """v_m = a(theta)^H u_m / Nv for every frame."""
    u = np.asarray(u)
    a = angle_steering(theta, u.shape[1], d_over_lambda)
    return IqSeries(u @ a.conj() / u.shape[1], float(omega_b), float(theta))


def fit_circle(z):
    """Least-squares circle through complex points.

    An algebraic (Kasa) fit seeds one Gauss-Newton step on the geometric
    distances. Returns ``(center, radius)``.
    """
    z = np.asarray(z, dtype=complex)
    if z.size < 3:
        raise EstimationError("circle fit needs at least 3 points")
    x, y = z.real, z.imag
    scale = np.max(np.abs(z - z.mean()))
    if not scale > 0:
        raise EstimationError("circle fit on coincident points")
    # normalise for conditioning
    off = z.mean()
    xn, yn = (x - off.real) / scale, (y - off.imag) / scale
    a = np.column_stack([xn, yn, np.ones_like(xn)])
    b = -(xn ** 2 + yn ** 2)
    sol, _, rank, sv = np.linalg.lstsq(a, b, rcond=None)
    if rank < 3 or sv[-1] < 1e-10 * sv[0]:
        raise EstimationError("IQ points are collinear; no circle to fit")
    cx, cy = -sol[0] / 2, -sol[1] / 2
    r2 = cx ** 2 + cy ** 2 - sol[2]
    if not r2 > 0:
        raise EstimationError("degenerate circle fit")
    r = np.sqrt(r2)
    if r > 1e6:
        raise EstimationError("IQ points are collinear; no circle to fit")
    # one Gauss-Newton step on d_i = |p_i - c| - r
    dx, dy = xn - cx, yn - cy
    dist = np.hypot(dx, dy)
    if np.all(dist > 0):
        jac = np.column_stack([-dx / dist, -dy / dist, -np.ones_like(dist)])
        step, *_ = np.linalg.lstsq(jac, -(dist - r), rcond=None)
        cx, cy, r = cx + step[0], cy + step[1], r + step[2]
    if not r > 0:
        raise EstimationError("degenerate circle fit")
    center = complex(cx * scale + off.real, cy * scale + off.imag)
    return center, float(r * scale)


def remove_dc(iq):
    """Shift the IQ arc so its fitted circle is centred on the origin."""
    center, _ = fit_circle(iq.values)
    return IqSeries(iq.values - center, iq.omega_b, iq.theta)


def dacm(iq, ts, increment="cross"):
    """Differentiate-and-cross-multiply demodulation.

    x_0 = 0, x_m = x_{m-1} + (I_m dQ_m - Q_m dI_m) / (I_m^2 + Q_m^2).

    On a unit circle each increment is sin(dphi), so the output is compressed
    once the per-frame phase step exceeds a few tenths of a radian.
    ``increment="angle"`` replaces it with arg(z_m conj(z_{m-1})), exact for
    steps below pi.
    """
    v = np.asarray(iq.values if isinstance(iq, IqSeries) else iq)
    mag = np.abs(v)
    bad = np.flatnonzero(mag == 0)
    if bad.size:
        raise EstimationError(f"zero-magnitude IQ sample at index {int(bad[0])}")
    if increment == "cross":
        out = kernels.dacm_integrate(v.real, v.imag)
    elif increment == "angle":
        out = np.concatenate([[0.0], np.cumsum(np.angle(v[1:] * v[:-1].conj()))])
    else:
        raise ValueError(f"unknown increment {increment!r}")
    return PhaseSeries(out, float(ts))


def extract_phase(cube, location, increment="cross"):
    """Collapse, recentre and demodulate the cell at ``location``."""
    cfg = cube.config
    u = collapse_fast_time(cube, location.omega_b)
    iq = collapse_antennas(u, location.theta, location.omega_b, cfg.d_over_lambda)
    iq_c = remove_dc(iq)
    return iq, iq_c, dacm(iq_c, cfg.ts, increment)
