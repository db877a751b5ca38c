"""Range-azimuth localization by 2D MUSIC over the space-time covariance."""

import csv
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import EstimationError
from .radar import RangeAngle, angle_steering, beat_to_range, range_steering, range_to_beat

# max/median spectrum ratio below which a peak is not trusted
LOW_CONFIDENCE_RATIO = 2.0


def space_time_vector(frame):
    """Stack an (Nv, Nf) frame antenna-major, matching a(theta) kron s(omega)."""
    frame = np.asarray(frame)
    if frame.ndim != 2:
        raise ValueError(f"expected an (Nv, Nf) frame, got shape {frame.shape}")
    return frame.reshape(-1)


@dataclass(frozen=True)
class SpaceTimeCov:
    """Frame-averaged covariance of space-time vectors.

    Stored as the scaled snapshot matrix ``F`` with ``R = F F^H``; the dense
    matrix is built only when asked for.
    """

    snapshots: np.ndarray  # (Nv * Nf', K) / sqrt(K)
    nv: int
    nf: int
    fast_time_stride: int = 1

    @property
    def nframes_averaged(self):
        return self.snapshots.shape[1]

    @property
    def dim(self):
        return self.snapshots.shape[0]

    @cached_property
    def matrix(self):
        r = self.snapshots @ self.snapshots.conj().T
        return 0.5 * (r + r.conj().T)

    def eig(self):
        """Eigenvalues (descending) and eigenvectors of ``R``.

        When fewer frames than dimensions were averaged, only the leading
        ``K`` pairs are returned (the rest are exactly zero); they come from a
        thin SVD of the snapshots, which avoids the dense eigenproblem.
        """
        if self.nframes_averaged < self.dim:
            u, s, _ = np.linalg.svd(self.snapshots, full_matrices=False)
            return s ** 2, u
        w, u = np.linalg.eigh(self.matrix)
        order = np.argsort(w)[::-1]
        return w[order], u[:, order]

    def full_eig(self):
        """All ``Nv * Nf`` eigenpairs from the dense matrix, descending."""
        w, u = np.linalg.eigh(self.matrix)
        order = np.argsort(w)[::-1]
        return w[order], u[:, order]


def estimate_cov(cube, frames=None, fast_time_stride=1):
    """Average Y~ Y~^H over the selected frames of a cube.

    ``fast_time_stride`` keeps every k-th fast-time sample to shrink the
    problem; steering vectors must then use ``k * tf``.
    """
    data = cube.data if hasattr(cube, "data") else np.asarray(cube)
    if frames is None:
        frames = range(data.shape[0])
    frames = np.asarray(list(frames), dtype=int)
    if frames.size == 0:
        raise ValueError("frame set is empty")
    sub = data[frames][:, :, ::fast_time_stride]
    k, nv, nf = sub.shape
    snaps = sub.reshape(k, nv * nf).T / np.sqrt(k)
    return SpaceTimeCov(np.ascontiguousarray(snaps), nv, nf, fast_time_stride)


@dataclass(frozen=True)
class PseudoSpectrum2D:
    theta_grid: np.ndarray  # rad
    omega_grid: np.ndarray  # rad/s
    values: np.ndarray      # (len(theta_grid), len(omega_grid))
    slope: float

    @property
    def range_grid(self):
        return beat_to_range(self.omega_grid, self.slope)

    @property
    def peak_to_median(self):
        return float(self.values.max() / np.median(self.values))

    @property
    def low_confidence(self):
        return self.peak_to_median < LOW_CONFIDENCE_RATIO

    def argmax(self):
        """(theta index, omega index) of the peak.

        Exact ties go to the smaller range, then the smaller |theta|.
        """
        vmax = self.values.max()
        ti, wi = np.nonzero(self.values == vmax)
        order = np.lexsort((np.abs(self.theta_grid[ti]), self.omega_grid[wi]))
        return int(ti[order[0]]), int(wi[order[0]])

    def to_csv(self, fh):
        w = csv.writer(fh)
        w.writerow(["theta_rad", "omega_rad_s", "range_m", "value"])
        ranges = self.range_grid
        for i, th in enumerate(self.theta_grid):
            for j, om in enumerate(self.omega_grid):
                w.writerow([repr(float(th)), repr(float(om)), repr(float(ranges[j])),
                            repr(float(self.values[i, j]))])


def default_grids(config, theta_step_deg=1.0, theta_max_deg=60.0, r_min=0.2, r_max=5.0,
                  range_step=0.02):
    """Angle grid (rad) and beat grid (rad/s) on round range steps.

    Ranges are multiples of ``range_step`` inside ``[r_min, r_max]`` and
    below the unambiguous range.
    """
    n_t = int(round(theta_max_deg / theta_step_deg))
    theta = np.radians(np.arange(-n_t, n_t + 1) * theta_step_deg)
    r_hi = min(r_max, config.max_range * (1 - 1e-9))
    k = np.arange(int(np.ceil(r_min / range_step - 1e-9)), int(np.floor(r_hi / range_step + 1e-9)) + 1)
    ranges = k * range_step
    ranges = ranges[ranges < config.max_range]
    return theta, range_to_beat(ranges, config.slope)


def noise_projection(cov, config, n_sources, theta_grid, omega_grid):
    """||V^H G||_F^2 on the grid, with G the full noise eigenvector set.

    Computed as ||V||^2 minus the energy captured by the signal subspace,
    which equals the noise-subspace form because the eigenvectors are a
    complete orthonormal basis.
    """
    w, u = cov.eig()
    if w.size == 0 or not w[0] > 0:
        raise EstimationError("covariance is identically zero")
    us = u[:, :n_sources].T.reshape(n_sources, cov.nv, cov.nf)
    a_grid = angle_steering(theta_grid, cov.nv, config.d_over_lambda)
    s_grid = range_steering(omega_grid, config.tf * cov.fast_time_stride, cov.nf)
    captured = kernels.music_signal_power(us, a_grid, s_grid)
    return cov.nv * cov.nf - captured


def music_2d(cov, config, n_sources=1, theta_grid=None, omega_grid=None):
    """2D MUSIC pseudo-spectrum and its peak.

    Returns
    -------
    spectrum : PseudoSpectrum2D
        ``1 / ||(a(theta) kron s(omega))^H G||_F^2`` on the grid.
    peak : RangeAngle
    """
    if n_sources < 1 or n_sources >= cov.dim:
        raise ValueError(f"n_sources must be in [1, {cov.dim - 1}], got {n_sources}")
    if theta_grid is None or omega_grid is None:
        t_def, w_def = default_grids(config)
        theta_grid = t_def if theta_grid is None else theta_grid
        omega_grid = w_def if omega_grid is None else omega_grid
    theta_grid = np.asarray(theta_grid, dtype=float)
    omega_grid = np.asarray(omega_grid, dtype=float)
    if theta_grid.size == 0 or omega_grid.size == 0:
        raise ValueError("grids must be non-empty")
    resid = noise_projection(cov, config, n_sources, theta_grid, omega_grid)
    # cancellation can push the truth cell to ~0 or slightly negative
    floor = np.finfo(float).eps * cov.nv * cov.nf
    values = 1.0 / np.maximum(resid, floor)
    spec = PseudoSpectrum2D(theta_grid, omega_grid, values, config.slope)
    ti, wi = spec.argmax()
    return spec, RangeAngle(float(omega_grid[wi]), float(theta_grid[ti]), config.slope)
