"""End-to-end processing: clutter removal, localization, phase, HMUSIC."""

from dataclasses import dataclass, field

import numpy as np

from .clutter import remove_static
from .errors import EstimationError, PipelineError
from .hmusic import HmusicConfig, fft_baseline, hmusic_estimate
from .locate import default_grids, estimate_cov, music_2d
from .phase import extract_phase


@dataclass(frozen=True)
class PipelineOptions:
    hmusic: HmusicConfig = field(default_factory=HmusicConfig)
    clutter_window: int | None = None  # None: the whole window
    clutter_causal: bool = False
    n_sources: int = 1
    per_frame: int | None = None       # locate on this frame only
    fast_time_stride: int = 1
    theta_grid: np.ndarray | None = None
    omega_grid: np.ndarray | None = None
    require_confident_location: bool = True
    dacm_increment: str = "cross"


@dataclass
class PipelineResult:
    location: object
    loc_spectrum: object
    iq: object
    iq_centered: object
    phase: object
    hmusic: object
    hmusic_spectrum: object
    fft: object

    @property
    def estimates(self):
        return {"hmusic": self.hmusic, "fft": self.fft}


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except (EstimationError, ValueError, np.linalg.LinAlgError) as exc:
        raise PipelineError(name, str(exc)) from exc


def run_pipeline(cube, options=None):
    """Run every stage on one estimation window (all frames of ``cube``)."""
    opts = options or PipelineOptions()
    cfg = cube.config
    clean = _stage("clutter", remove_static, cube, opts.clutter_window, opts.clutter_causal)

    def locate():
        frames = [opts.per_frame] if opts.per_frame is not None else None
        cov = estimate_cov(clean, frames, opts.fast_time_stride)
        tg, wg = opts.theta_grid, opts.omega_grid
        if tg is None or wg is None:
            td, wd = default_grids(cfg)
            tg = td if tg is None else tg
            wg = wd if wg is None else wg
        spec, loc = music_2d(cov, cfg, opts.n_sources, tg, wg)
        if opts.require_confident_location and spec.low_confidence:
            raise EstimationError(
                f"no dominant peak (max/median = {spec.peak_to_median:.3g}); low confidence"
            )
        return spec, loc

    spec, loc = _stage("locate", locate)
    iq, iq_c, phase = _stage("phase", extract_phase, clean, loc, opts.dacm_increment)
    est, hspec = _stage("hmusic", hmusic_estimate, phase, opts.hmusic)
    fft = _stage("fft", fft_baseline, phase, opts.hmusic)
    return PipelineResult(loc, spec, iq, iq_c, phase, est, hspec, fft)


def window_starts(n_frames, ns, stride):
    if n_frames < ns:
        raise PipelineError("windowing", f"{n_frames} frames is shorter than one window of {ns}")
    return list(range(0, n_frames - ns + 1, stride))


def run_session(cube, options=None, stride=20):
    """Slide ``config.ns``-frame windows over the cube, ``stride`` frames apart.

    Yields ``(start_frame, PipelineResult | PipelineError)``.
    """
    ns = cube.config.ns
    for start in window_starts(cube.n_frames, ns, stride):
        try:
            yield start, run_pipeline(cube.frames(start, start + ns), options)
        except PipelineError as exc:
            yield start, exc
