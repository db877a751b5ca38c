"""Monte-Carlo accuracy evaluation against simulated ground truth."""

import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import PipelineError
from .hmusic import HmusicConfig
from .pipeline import PipelineOptions, run_session
from .radar import RadarConfig, read_keyvalue
from .scene import SceneSpec, TargetSpec, VitalModel, synthesize

RR_TOL_BPM = 3.0
HR_TOL_BPM = 5.0
PERCENTILES = (50, 75, 88, 89, 90, 95)
METHODS = ("hmusic", "fft")


@dataclass(frozen=True)
class DistributionSpec:
    """Ranges that per-trial scenes are drawn from (uniformly).

    ``interferer_harmonic > 0`` builds the adversarial suite: that
    respiration harmonic is forced into the heartbeat band with an amplitude
    ``interferer_ratio`` times the heartbeat fundamental, and heartbeats
    closer than ``min_interferer_gap_hz`` to it are redrawn.
    """

    f_r_hz: tuple = (0.15, 0.5)
    f_h_hz: tuple = (0.9, 1.8)
    range_m: tuple = (0.5, 3.0)
    theta_deg: tuple = (-45.0, 45.0)
    snr_db: tuple = (15.0, 25.0)
    clutter_count: int = 1
    clutter_rel_db: tuple = (0.0, 20.0)
    n_harmonics: int = 2
    m_r_m: tuple = (1e-3, 3e-3)
    m_h_m: tuple = (1e-4, 5e-4)
    resp_harmonic_ratio: tuple = (0.1, 0.3)
    heart_harmonic_ratio: tuple = (0.2, 0.5)
    interferer_harmonic: int = 0
    interferer_ratio: tuple = (1.0, 2.0)
    min_interferer_gap_hz: float = 0.1
    session_frames: int = 0       # 0: one window of config.ns frames
    window_stride: int = 20
    # estimator
    hmusic_L: int = 2
    hmusic_M: int = 64
    hmusic_grid_step: float = 0.01
    resp_band: tuple = (0.1, 0.6)
    heart_band: tuple = (0.8, 2.0)
    signal_model: str = "real"
    dacm_increment: str = "cross"

    def hmusic_config(self):
        return HmusicConfig(
            M=self.hmusic_M,
            L=self.hmusic_L,
            resp_band=self.resp_band,
            heart_band=self.heart_band,
            grid_step=self.hmusic_grid_step,
            signal_model=self.signal_model,
        )

    @classmethod
    def from_dict(cls, d):
        kinds = {f.name: f.default for f in fields(cls)}
        kwargs = {}
        for key, raw in d.items():
            if key not in kinds:
                raise ValueError(f"unknown distribution key {key!r}")
            default = kinds[key]
            if isinstance(default, tuple):
                vals = tuple(float(x) for x in raw.replace(",", " ").split())
                if len(vals) == 1:
                    vals = (vals[0], vals[0])
                if len(vals) != 2 or vals[0] > vals[1]:
                    raise ValueError(f"{key}: expected 'lo, hi', got {raw!r}")
                kwargs[key] = vals
            elif isinstance(default, bool):
                kwargs[key] = raw.lower() in ("1", "true", "yes")
            elif isinstance(default, int):
                kwargs[key] = int(raw)
            elif isinstance(default, float):
                kwargs[key] = float(raw)
            else:
                kwargs[key] = raw
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path):
        d = read_keyvalue(path)
        radar = {k: d.pop(k) for k in list(d) if k in RadarConfig._FILE_KEYS}
        return cls.from_dict(d), RadarConfig.from_dict(radar)


def draw_scene(dist, rng, config):
    """One random scene and its ground-truth human target."""
    u = lambda bounds: float(rng.uniform(*bounds))  # noqa: E731
    L = dist.n_harmonics
    h_amp = u(dist.m_h_m)
    if dist.interferer_harmonic:
        k = dist.interferer_harmonic
        lo = max(dist.f_r_hz[0], dist.heart_band[0] / k)
        hi = min(dist.f_r_hz[1], dist.heart_band[1] / k)
        if lo > hi:
            raise ValueError("no respiration rate puts the interferer inside the heart band")
        f_r = u((lo, hi))
        f_h = u(dist.f_h_hz)
        while abs(f_h - k * f_r) < dist.min_interferer_gap_hz:
            f_h = u(dist.f_h_hz)
    else:
        f_r = u(dist.f_r_hz)
        f_h = u(dist.f_h_hz)
    m_r = [u(dist.m_r_m)]
    m_h = [h_amp]
    for _ in range(1, L):
        m_r.append(m_r[0] * u(dist.resp_harmonic_ratio))
        m_h.append(h_amp * u(dist.heart_harmonic_ratio))
    if dist.interferer_harmonic:
        k = dist.interferer_harmonic
        if k > L:
            raise ValueError("interferer_harmonic exceeds n_harmonics")
        m_r[k - 1] = h_amp * u(dist.interferer_ratio)
    human = TargetSpec(
        range_m=u(dist.range_m),
        theta=float(np.radians(u(dist.theta_deg))),
        amplitude=1.0,
        vital=VitalModel(f_r, f_h, tuple(m_r), tuple(m_h)),
    )
    snr_db = u(dist.snr_db)
    targets = [human]
    for _ in range(dist.clutter_count):
        rel = u(dist.clutter_rel_db)
        targets.append(TargetSpec(
            range_m=u((0.2, min(5.0, 0.95 * config.max_range))),
            theta=float(np.radians(u((-60.0, 60.0)))),
            amplitude=10 ** (rel / 20),
        ))
    frames = dist.session_frames or config.ns
    scene = SceneSpec(
        targets=targets,
        noise_sigma=10 ** (-snr_db / 20),
        seed=int(rng.integers(2**31)),
        frames=frames,
    )
    return scene


@dataclass
class TrialResult:
    scene_id: int
    window_start: int
    truth_rr_bpm: float
    truth_hr_bpm: float
    snr_db: float
    est: dict = field(default_factory=dict)  # method -> VitalEstimate dict
    loc_error_cells: int | None = None
    failure: str | None = None

    def error(self, method, which):
        e = self.est.get(method)
        if e is None:
            return float("inf")
        if which == "rr":
            return abs(e["rr_bpm"] - self.truth_rr_bpm)
        return abs(e["hr_bpm"] - self.truth_hr_bpm)


def _nearest(grid, value):
    return int(np.argmin(np.abs(np.asarray(grid) - value)))


def run_trial(args):
    scene_id, seed_seq, dist, config = args
    rng = np.random.default_rng(seed_seq)
    scene = draw_scene(dist, rng, config)
    cube = synthesize(scene, config)
    human = scene.human
    opts = PipelineOptions(hmusic=dist.hmusic_config(), dacm_increment=dist.dacm_increment)
    out = []
    for start, res in run_session(cube, opts, dist.window_stride):
        tr = TrialResult(
            scene_id=scene_id,
            window_start=start,
            truth_rr_bpm=60.0 * human.vital.f_r,
            truth_hr_bpm=60.0 * human.vital.f_h,
            snr_db=scene.snr_db,
        )
        if isinstance(res, PipelineError):
            tr.failure = str(res)
        else:
            spec = res.loc_spectrum
            ti, wi = spec.argmax()
            tt = _nearest(spec.theta_grid, human.theta)
            rt = _nearest(spec.range_grid, human.range_m)
            tr.loc_error_cells = max(abs(ti - tt), abs(wi - rt))
            tr.est = {m: e.to_dict() for m, e in res.estimates.items()}
        out.append(tr)
    return out


def _clean(x):
    x = float(x)
    return x if np.isfinite(x) else None


@dataclass
class AccuracyReport:
    n_trials: int
    n_windows: int
    seed: int
    methods: dict
    localization: dict

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        buf.write("method,metric,percentile,error_bpm\n")
        for method in sorted(self.methods):
            for metric in ("rr", "hr"):
                for p, v in self.methods[method][f"{metric}_error_percentiles"].items():
                    buf.write(f"{method},{metric},{p},{'' if v is None else repr(v)}\n")
        return buf.getvalue()


def summarize(trials, n_trials, seed):
    methods = {}
    for m in METHODS:
        rr = np.array([t.error(m, "rr") for t in trials])
        hr = np.array([t.error(m, "hr") for t in trials])
        methods[m] = {
            "rr_accuracy": float(np.mean(rr < RR_TOL_BPM)),
            "hr_accuracy": float(np.mean(hr < HR_TOL_BPM)),
            "failures": int(sum(t.est.get(m) is None for t in trials)),
            "rr_error_percentiles": {str(p): _clean(np.percentile(rr, p, method="higher")) for p in PERCENTILES},
            "hr_error_percentiles": {str(p): _clean(np.percentile(hr, p, method="higher")) for p in PERCENTILES},
        }
    cells = [t.loc_error_cells for t in trials if t.loc_error_cells is not None]
    localization = {
        "within_one_cell": float(np.mean([c <= 1 for c in cells])) if cells else 0.0,
        "exact_cell": float(np.mean([c == 0 for c in cells])) if cells else 0.0,
        "located": len(cells),
    }
    return AccuracyReport(n_trials, len(trials), seed, methods, localization)


def evaluate(dist, n_trials, seed, config=None, workers=1, return_trials=False):
    """Run ``n_trials`` independent scenes; deterministic for a given seed."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    config = config or RadarConfig()
    seqs = np.random.SeedSequence(seed).spawn(n_trials)
    jobs = [(i, s, dist, config) for i, s in enumerate(seqs)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            chunks = list(pool.map(run_trial, jobs))
    else:
        chunks = [run_trial(j) for j in jobs]
    trials = [t for chunk in chunks for t in chunk]
    report = summarize(trials, n_trials, seed)
    return (report, trials) if return_trials else report
