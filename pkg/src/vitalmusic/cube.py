"""ADC data cube container and its ``.vwcb`` binary format.

File layout, little-endian::

    magic   4s   b"VWCB"
    version u16  1
    frames  u32
    nv      u16
    nf      u32
    data    float32 (re, im) pairs in (frame, antenna, fast-time) order
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .radar import RadarConfig

MAGIC = b"VWCB"
VERSION = 1
_HEADER = struct.Struct("<4sHIHI")
assert _HEADER.size == 16


@dataclass(frozen=True)
class AdcCube:
    """Complex ADC samples indexed ``data[m, v, n]`` (frame, antenna, fast time).

    The frame count may exceed ``config.ns`` when the cube holds a whole
    session; estimation then runs on ``config.ns``-frame windows.
    """

    config: RadarConfig
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3:
            raise ValueError(f"cube data must be 3-D, got shape {data.shape}")
        _, nv, nf = data.shape
        if (nv, nf) != (self.config.nv, self.config.nf):
            raise ValueError(
                f"cube shape {data.shape} does not match config (nv={self.config.nv}, nf={self.config.nf})"
            )
        if data.shape[0] < 1:
            raise ValueError("cube has no frames")
        if not np.iscomplexobj(data):
            data = data.astype(np.complex128)
        object.__setattr__(self, "data", data)

    @property
    def n_frames(self):
        return self.data.shape[0]

    def frames(self, start, stop):
        return AdcCube(self.config, self.data[start:stop])

    def with_data(self, data):
        return AdcCube(self.config, data)

    def __add__(self, other):
        if other.config != self.config:
            raise ValueError("cannot add cubes with different configs")
        return AdcCube(self.config, self.data + other.data)


def write_cube(path, cube):
    frames, nv, nf = cube.data.shape
    inter = np.empty((frames, nv, nf, 2), dtype="<f4")
    inter[..., 0] = cube.data.real
    inter[..., 1] = cube.data.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, frames, nv, nf))
        fh.write(inter.tobytes())


def read_header(path):
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
    if len(head) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, frames, nv, nf = _HEADER.unpack(head)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    return frames, nv, nf


def read_cube(path, config=None):
    """Load a cube. Without ``config`` the default one is resized to the file."""
    frames, nv, nf = read_header(path)
    raw = np.fromfile(path, dtype="<f4", offset=_HEADER.size)
    expected = frames * nv * nf * 2
    if raw.size != expected:
        raise ValueError(f"{Path(path).name}: expected {expected} floats, found {raw.size}")
    raw = raw.reshape(frames, nv, nf, 2).astype(np.float64)
    data = raw[..., 0] + 1j * raw[..., 1]
    if config is None:
        config = RadarConfig(nv=nv, nf=nf, ns=min(RadarConfig.ns, frames) if frames >= 2 else 2)
    return AdcCube(config, data)
