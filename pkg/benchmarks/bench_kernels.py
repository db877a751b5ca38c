"""Time the numba kernels against their numpy fallbacks at the default radar sizes.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--pipeline]

``--pipeline`` also times one full estimation window under each backend,
each in a fresh interpreter so the environment flag takes effect.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from vitalmusic import kernels
from vitalmusic.locate import default_grids
from vitalmusic.radar import RadarConfig, angle_steering, range_steering

PIPELINE_SNIPPET = """
import time
import numpy as np
from vitalmusic import RadarConfig, SceneSpec, TargetSpec, VitalModel, run_pipeline, synthesize
from vitalmusic.kernels import BACKEND
cfg = RadarConfig()
human = TargetSpec(1.0, 0.0, 1.0, VitalModel(0.25, 1.2, (1e-3, 3e-4), (1e-4, 3e-5)))
cube = synthesize(SceneSpec([human, TargetSpec(2.0, np.radians(20), 3.0)], 0.05, 1), cfg)
run_pipeline(cube)
t = time.perf_counter()
for _ in range(5):
    run_pipeline(cube)
print(BACKEND, (time.perf_counter() - t) / 5)
"""


def cases():
    cfg = RadarConfig()
    rng = np.random.default_rng(0)
    theta, omega = default_grids(cfg)
    us = (rng.standard_normal((1, cfg.nv, cfg.nf)) + 1j * rng.standard_normal((1, cfg.nv, cfg.nf)))
    a = angle_steering(theta, cfg.nv)
    s = range_steering(omega, cfg.tf, cfg.nf)
    g = np.linalg.qr(rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64)))[0][:, 9:]
    om = 2 * np.pi * np.arange(0.1, 2.0, 0.01) * cfg.ts
    x = rng.standard_normal(cfg.ns)
    cube = rng.standard_normal((cfg.ns, cfg.nv, cfg.nf)) + 0j
    iq = np.exp(1j * np.cumsum(rng.uniform(-0.3, 0.3, 2400)))
    return {
        "music_signal_power": lambda k: k.music_signal_power(us, a, s),
        "harmonic_residual": lambda k: k.harmonic_residual(g, om, 2, -1.0),
        "window_covariance": lambda k: k.window_covariance(x.astype(complex), 64),
        "trailing_mean_subtract": lambda k: k.trailing_mean_subtract(cube, 256),
        "dacm_integrate": lambda k: k.dacm_integrate(iq.real.copy(), iq.imag.copy()),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--pipeline", action="store_true")
    args = ap.parse_args()

    flavours = [kernels.numpy_kernels]
    if kernels.numba_kernels is not None:
        flavours.append(kernels.numba_kernels)
    print(f"{'kernel':24s}" + "".join(f"{k.name:>12s}" for k in flavours) + f"{'speedup':>10s}")
    for name, fn in cases().items():
        times = []
        for k in flavours:
            fn(k)  # warm-up, includes numba compilation
            times.append(min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat)))
        speed = f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else ""
        print(f"{name:24s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times) + speed)

    if args.pipeline:
        for flag in ("1", "0"):
            env = dict(os.environ, VITALMUSIC_NO_NUMBA=flag)
            out = subprocess.run([sys.executable, "-c", PIPELINE_SNIPPET], env=env,
                                 capture_output=True, text=True, check=True).stdout.split()
            print(f"pipeline window ({out[0]}): {float(out[1]) * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
