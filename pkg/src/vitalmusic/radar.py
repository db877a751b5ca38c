"""Radar configuration, unit conversions and steering vectors."""

from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

C = 299_792_458.0  # m/s


def read_keyvalue(path):
    """Parse a ``key = value`` text file into a dict of strings.

    Blank lines and lines starting with ``#`` are skipped.
    """
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in out:
            raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def write_keyvalue(path, items):
    lines = [f"{k} = {v}" for k, v in items.items()]
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class RadarConfig:
    """FMCW waveform, sampling and array parameters (SI units).

    Defaults reproduce the IWR6843ISK setup: 60 GHz start, 60 MHz/us slope,
    240 samples at 4 Msps, 50 ms frames, 8 virtual antennas and 256-frame
    estimation windows.
    """

    f0: float = 60e9
    slope: float = 60e12
    tc: float = 66.66e-6
    tf: float = 0.25e-6
    ts: float = 50e-3
    nf: int = 240
    ns: int = 256
    nv: int = 8
    d_over_lambda: float = 0.5

    # key in the config file -> attribute
    _FILE_KEYS = {
        "f0_hz": "f0",
        "slope_hz_per_s": "slope",
        "chirp_s": "tc",
        "tf_s": "tf",
        "ts_s": "ts",
        "nf": "nf",
        "ns": "ns",
        "nv": "nv",
        "d_over_lambda": "d_over_lambda",
    }

    def __post_init__(self):
        for name in ("nf", "ns", "nv"):
            value = getattr(self, name)
            if int(value) != value:
                raise ValueError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.nf < 2 or self.ns < 2 or self.nv < 1:
            raise ValueError("need nf >= 2, ns >= 2, nv >= 1")
        for name in ("f0", "slope", "tc", "tf", "ts", "d_over_lambda"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if self.nf * self.tf > self.tc * (1 + 1e-12):
            raise ValueError(
                f"nf * tf = {self.nf * self.tf:.6g} s exceeds the chirp duration {self.tc:.6g} s"
            )

    @property
    def lambda0(self):
        """Wavelength at the start frequency."""
        return C / self.f0

    @property
    def bandwidth(self):
        """Swept bandwidth covered by the sampled part of the chirp."""
        return self.slope * self.nf * self.tf

    @property
    def range_resolution(self):
        return C / (2.0 * self.bandwidth)

    @property
    def max_range(self):
        """Unambiguous range: beat frequency at the fast-time Nyquist rate."""
        return beat_to_range(np.pi / self.tf, self.slope)

    def replace(self, **changes):
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return RadarConfig(**values)

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - set(cls._FILE_KEYS)
        if unknown:
            raise ValueError(f"unknown radar config keys: {sorted(unknown)}")
        kwargs = {}
        for key, attr in cls._FILE_KEYS.items():
            if key in d:
                raw = d[key]
                kwargs[attr] = int(raw) if attr in ("nf", "ns", "nv") else float(raw)
        return cls(**kwargs)

    def to_dict(self):
        out = {}
        for key, attr in self._FILE_KEYS.items():
            value = getattr(self, attr)
            out[key] = str(int(value)) if attr in ("nf", "ns", "nv") else repr(float(value))
        return out

    @classmethod
    def from_file(cls, path):
        return cls.from_dict(read_keyvalue(path))

    def to_file(self, path):
        write_keyvalue(path, self.to_dict())


@dataclass(frozen=True)
class RangeAngle:
    """A range-azimuth cell: beat angular frequency and azimuth."""

    omega_b: float
    theta: float
    slope: float

    def __post_init__(self):
        if abs(self.theta) > np.pi / 2 + 1e-12:
            raise ValueError(f"theta {self.theta!r} outside [-pi/2, pi/2]")
        if self.omega_b < 0:
            raise ValueError("omega_b must be non-negative")

    @property
    def range_m(self):
        return beat_to_range(self.omega_b, self.slope)

    @property
    def theta_deg(self):
        return float(np.degrees(self.theta))


def beat_to_range(omega_b, slope):
    """Range in metres for a beat angular frequency: omega_b c / (4 pi S)."""
    omega_b = np.asarray(omega_b, dtype=float)
    if np.any(omega_b < 0):
        raise ValueError("omega_b must be non-negative")
    r = omega_b * C / (4.0 * np.pi * slope)
    return float(r) if r.ndim == 0 else r


def range_to_beat(range_m, slope):
    """Beat angular frequency 4 pi S R / c for a range in metres."""
    range_m = np.asarray(range_m, dtype=float)
    if np.any(range_m < 0):
        raise ValueError("range must be non-negative")
    w = 4.0 * np.pi * slope * range_m / C
    return float(w) if w.ndim == 0 else w


def angle_steering(theta, nv, d_over_lambda=0.5):
    """Array response exp(j 2 pi (d / lambda) v sin(theta)) for v = 0..nv-1.

    ``theta`` may be an array, in which case one row per angle is returned.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(np.abs(theta) > np.pi / 2 + 1e-12):
        raise ValueError("theta must lie in [-pi/2, pi/2]")
    v = np.arange(nv)
    phase = 2.0 * np.pi * d_over_lambda * np.multiply.outer(np.sin(theta), v)
    return np.exp(1j * phase)


def range_steering(omega_b, tf, nf):
    """Fast-time response exp(j omega_b n tf) for n = 0..nf-1.

    ``omega_b`` may be an array, in which case one row per beat is returned.
    """
    omega_b = np.asarray(omega_b, dtype=float)
    if np.any(omega_b < 0):
        raise ValueError("omega_b must be non-negative")
    return np.exp(1j * np.multiply.outer(omega_b, np.arange(nf) * tf))
