"""Synthetic scenes: static reflectors plus one breathing human."""

from dataclasses import dataclass

import numpy as np

from .cube import AdcCube
from .radar import C, angle_steering, read_keyvalue, write_keyvalue


@dataclass(frozen=True)
class VitalModel:
    """Chest displacement as a sum of respiration and heartbeat harmonics.

    ``m_r[l]`` and ``m_h[l]`` are the amplitudes (m) of harmonic ``l + 1``.
    """

    f_r: float
    f_h: float
    m_r: tuple = (1e-3,)
    m_h: tuple = (1e-4,)

    def __post_init__(self):
        m_r = tuple(float(a) for a in np.atleast_1d(self.m_r))
        m_h = tuple(float(a) for a in np.atleast_1d(self.m_h))
        if len(m_r) != len(m_h):
            # pad the shorter list; both sources share the harmonic count
            n = max(len(m_r), len(m_h))
            m_r = m_r + (0.0,) * (n - len(m_r))
            m_h = m_h + (0.0,) * (n - len(m_h))
        object.__setattr__(self, "m_r", m_r)
        object.__setattr__(self, "m_h", m_h)
        if not 0 < self.f_r < self.f_h:
            raise ValueError(f"need 0 < f_r < f_h, got f_r={self.f_r}, f_h={self.f_h}")
        if min(m_r + m_h) < 0:
            raise ValueError("harmonic amplitudes must be non-negative")

    @property
    def n_harmonics(self):
        return len(self.m_r)


@dataclass(frozen=True)
class TargetSpec:
    range_m: float
    theta: float
    amplitude: float = 1.0
    vital: VitalModel | None = None

    @property
    def is_human(self):
        return self.vital is not None


@dataclass(frozen=True)
class SceneSpec:
    targets: tuple
    noise_sigma: float = 0.0
    seed: int = 0
    frames: int | None = None  # defaults to config.ns

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if sum(t.is_human for t in self.targets) != 1:
            raise ValueError("a scene needs exactly one human target")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")

    @property
    def human(self):
        return next(t for t in self.targets if t.is_human)

    @property
    def snr_db(self):
        if self.noise_sigma == 0:
            return float("inf")
        return float(20 * np.log10(self.human.amplitude / self.noise_sigma))


def displacement(vital, t):
    """Chest displacement (m) at time(s) ``t``."""
    t = np.asarray(t, dtype=float)
    x = np.zeros_like(t)
    wr = 2 * np.pi * vital.f_r
    wh = 2 * np.pi * vital.f_h
    for l, (ar, ah) in enumerate(zip(vital.m_r, vital.m_h), start=1):
        x = x + ar * np.cos(l * wr * t) + ah * np.cos(l * wh * t)
    return float(x) if x.ndim == 0 else x


def validate_scene(scene, config):
    for t in scene.targets:
        if not 0 <= t.range_m < config.max_range:
            raise ValueError(f"target range {t.range_m} m outside [0, {config.max_range:.4g}) m")
        if abs(t.theta) > np.pi / 2:
            raise ValueError(f"target angle {t.theta} rad outside [-pi/2, pi/2]")
        if t.vital is not None:
            nyq = 1 / (2 * config.ts)
            if t.vital.f_h >= nyq:
                raise ValueError(f"heartbeat {t.vital.f_h} Hz above slow-time Nyquist {nyq} Hz")


def frame_noise(seed, m, shape, sigma):
    """Circular complex Gaussian noise for frame ``m``, seeded by (seed, m)."""
    rng = np.random.default_rng([seed, m])
    z = rng.standard_normal(shape + (2,))
    return sigma / np.sqrt(2) * (z[..., 0] + 1j * z[..., 1])


def synthesize(scene, config, frames=None):
    """Render the scene into an ADC cube.

    The beat frequency of the human is recomputed from the instantaneous range
    of every frame rather than frozen at the rest range.
    """
    validate_scene(scene, config)
    frames = frames or scene.frames or config.ns
    t = np.arange(frames) * config.ts
    n = np.arange(config.nf)
    k_phase = 4 * np.pi / config.lambda0
    k_beat = 4 * np.pi * config.slope / C
    data = np.zeros((frames, config.nv, config.nf), dtype=np.complex128)
    for tgt in scene.targets:
        r = np.full(frames, float(tgt.range_m))
        if tgt.vital is not None:
            r = r + displacement(tgt.vital, t)
        fast = np.exp(1j * (np.outer(k_beat * r, n * config.tf) + (k_phase * r)[:, None]))
        a = angle_steering(tgt.theta, config.nv, config.d_over_lambda)
        data += tgt.amplitude * fast[:, None, :] * a[None, :, None]
    if scene.noise_sigma > 0:
        for m in range(frames):
            data[m] += frame_noise(scene.seed, m, (config.nv, config.nf), scene.noise_sigma)
    return AdcCube(config, data)


# ---------------------------------------------------------------------------
# key = value scene files
# ---------------------------------------------------------------------------

def _floats(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


def scene_from_dict(d):
    """Build a scene from flat keys.

    Global keys: ``noise_sigma``, ``seed``, ``frames``. Target keys are
    prefixed ``target<i>.``: ``range_m``, ``theta_deg`` (or ``theta_rad``),
    ``amplitude`` and, for the human, ``f_r_hz``, ``f_h_hz``, ``m_r_m``,
    ``m_h_m`` (comma-separated per-harmonic amplitudes).
    """
    grouped = {}
    glob = {}
    for key, value in d.items():
        if key.startswith("target"):
            head, _, sub = key.partition(".")
            idx = head[len("target"):]
            if not idx.isdigit() or not sub:
                raise ValueError(f"bad target key {key!r}")
            grouped.setdefault(int(idx), {})[sub] = value
        else:
            glob[key] = value
    unknown = set(glob) - {"noise_sigma", "seed", "frames"}
    if unknown:
        raise ValueError(f"unknown scene keys: {sorted(unknown)}")
    targets = []
    for idx in sorted(grouped):
        g = grouped[idx]
        if "theta_rad" in g:
            theta = float(g.pop("theta_rad"))
        else:
            theta = float(np.radians(float(g.pop("theta_deg", "0"))))
        vital = None
        if "f_r_hz" in g or "f_h_hz" in g:
            vital = VitalModel(
                f_r=float(g.pop("f_r_hz")),
                f_h=float(g.pop("f_h_hz")),
                m_r=_floats(g.pop("m_r_m", "1e-3")),
                m_h=_floats(g.pop("m_h_m", "1e-4")),
            )
        tgt = TargetSpec(
            range_m=float(g.pop("range_m")),
            theta=theta,
            amplitude=float(g.pop("amplitude", "1")),
            vital=vital,
        )
        if g:
            raise ValueError(f"unknown keys for target{idx}: {sorted(g)}")
        targets.append(tgt)
    frames = glob.get("frames")
    return SceneSpec(
        targets=targets,
        noise_sigma=float(glob.get("noise_sigma", "0")),
        seed=int(glob.get("seed", "0")),
        frames=int(frames) if frames else None,
    )


def scene_to_dict(scene):
    num = lambda x: repr(float(x))  # noqa: E731
    out = {"noise_sigma": num(scene.noise_sigma), "seed": str(int(scene.seed))}
    if scene.frames:
        out["frames"] = str(scene.frames)
    for i, t in enumerate(scene.targets):
        p = f"target{i}."
        out[p + "range_m"] = num(t.range_m)
        out[p + "theta_rad"] = num(t.theta)
        out[p + "amplitude"] = num(t.amplitude)
        if t.vital is not None:
            out[p + "f_r_hz"] = num(t.vital.f_r)
            out[p + "f_h_hz"] = num(t.vital.f_h)
            out[p + "m_r_m"] = ", ".join(num(a) for a in t.vital.m_r)
            out[p + "m_h_m"] = ", ".join(num(a) for a in t.vital.m_h)
    return out


def load_scene(path):
    return scene_from_dict(read_keyvalue(path))


def save_scene(path, scene):
    write_keyvalue(path, scene_to_dict(scene))
