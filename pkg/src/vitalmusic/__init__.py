"""mmWave FMCW vital-sign estimation: 2D-MUSIC localization and harmonic MUSIC."""

from .clutter import remove_static
from .cube import AdcCube, read_cube, write_cube
from .errors import EstimationError, PipelineError
from .hmusic import HmusicConfig, VitalEstimate, fft_baseline, hmusic_estimate
from .locate import estimate_cov, music_2d
from .phase import dacm, extract_phase, remove_dc
from .pipeline import PipelineOptions, run_pipeline, run_session
from .radar import RadarConfig, angle_steering, beat_to_range, range_steering, range_to_beat
from .scene import SceneSpec, TargetSpec, VitalModel, displacement, synthesize

__version__ = "0.1.0"

__all__ = [
    "AdcCube",
    "EstimationError",
    "HmusicConfig",
    "PipelineError",
    "PipelineOptions",
    "RadarConfig",
    "SceneSpec",
    "TargetSpec",
    "VitalEstimate",
    "VitalModel",
    "angle_steering",
    "beat_to_range",
    "dacm",
    "displacement",
    "estimate_cov",
    "extract_phase",
    "fft_baseline",
    "hmusic_estimate",
    "music_2d",
    "range_steering",
    "range_to_beat",
    "read_cube",
    "remove_dc",
    "remove_static",
    "run_pipeline",
    "run_session",
    "synthesize",
    "write_cube",
]
