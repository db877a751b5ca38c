import numpy as np
import pytest

from vitalmusic import kernels
from vitalmusic.radar import RadarConfig
from vitalmusic.scene import SceneSpec, TargetSpec, VitalModel

FLAVOURS = [kernels.numpy_kernels] + ([kernels.numba_kernels] if kernels.numba_kernels else [])


@pytest.fixture(params=FLAVOURS, ids=lambda k: k.name)
def flavour(request):
    return request.param


@pytest.fixture(scope="session")
def config():
    return RadarConfig()


@pytest.fixture(scope="session")
def small_config():
    # small enough for a dense eigendecomposition of the space-time covariance
    return RadarConfig(nf=16, nv=4, ns=64)


def golden_scene(clutter=True, noise_sigma=0.0, seed=0):
    human = TargetSpec(
        range_m=1.0,
        theta=0.0,
        vital=VitalModel(f_r=0.25, f_h=1.2, m_r=(1e-3, 3e-4), m_h=(1e-4, 3e-5)),
    )
    targets = [human]
    if clutter:
        targets.append(TargetSpec(range_m=2.0, theta=np.radians(20.0), amplitude=3.0))
    return SceneSpec(targets, noise_sigma=noise_sigma, seed=seed)


@pytest.fixture(scope="session")
def golden():
    return golden_scene()


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
