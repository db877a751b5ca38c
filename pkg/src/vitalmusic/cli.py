"""Command-line entry point: ``vitalmusic {simulate,estimate,evaluate,spectrum}``."""

import argparse
import json
import sys
from pathlib import Path

from .cube import read_cube, read_header, write_cube
from .errors import PipelineError
from .evaluate import DistributionSpec, evaluate
from .hmusic import HmusicConfig
from .pipeline import PipelineOptions, run_pipeline, run_session
from .radar import RadarConfig
from .scene import load_scene, synthesize


def _radar(args):
    return RadarConfig.from_file(args.config) if args.config else RadarConfig()


def _cube_config(args):
    _, nv, nf = read_header(args.cube)
    cfg = _radar(args)
    if args.config is None:
        cfg = cfg.replace(nv=nv, nf=nf)
    return cfg


def _hmusic_config(args):
    return HmusicConfig(M=args.M, L=args.L, signal_model=args.signal_model)


def cmd_simulate(args):
    try:
        scene = load_scene(args.scene)
    except (OSError, ValueError) as exc:
        raise PipelineError("scene", str(exc)) from exc
    cfg = _radar(args)
    try:
        cube = synthesize(scene, cfg, args.frames)
    except ValueError as exc:
        raise PipelineError("simulate", str(exc)) from exc
    write_cube(args.output, cube)
    print(f"wrote {cube.n_frames} x {cfg.nv} x {cfg.nf} cube to {args.output} "
          f"(SNR {scene.snr_db:.1f} dB)", file=sys.stderr)


def _load_cube(args):
    try:
        cfg = _cube_config(args)
        return read_cube(args.cube, cfg)
    except (OSError, ValueError) as exc:
        raise PipelineError("read", str(exc)) from exc


def cmd_estimate(args):
    cube = _load_cube(args)
    opts = PipelineOptions(hmusic=_hmusic_config(args), dacm_increment=args.dacm_increment)
    dump = Path(args.dump_spectra) if args.dump_spectra else None
    if dump:
        dump.mkdir(parents=True, exist_ok=True)
    n_ok = 0
    with open(args.output, "w") as out:
        for start, res in run_session(cube, opts, args.stride):
            rec = {"window_start": start, "t_start_s": start * cube.config.ts}
            if isinstance(res, PipelineError):
                rec["error"] = str(res)
                rec["stage"] = res.stage
            else:
                n_ok += 1
                loc = res.location
                rec["range_m"] = loc.range_m
                rec["theta_rad"] = loc.theta
                rec["omega_b"] = loc.omega_b
                rec["fast_time_stride"] = opts.fast_time_stride
                for name, est in res.estimates.items():
                    rec[name] = est.to_dict()
                if dump:
                    with open(dump / f"locate_{start:05d}.csv", "w", newline="") as fh:
                        res.loc_spectrum.to_csv(fh)
                    for src in ("resp", "heart"):
                        with open(dump / f"hmusic_{src}_{start:05d}.csv", "w", newline="") as fh:
                            res.hmusic_spectrum.to_csv(fh, src)
                    with open(dump / f"phase_{start:05d}.csv", "w") as fh:
                        res.phase.to_csv(fh)
            out.write(json.dumps(rec, sort_keys=True) + "\n")
    if n_ok == 0:
        raise PipelineError("estimate", "no window produced an estimate")


def cmd_evaluate(args):
    try:
        dist, cfg = DistributionSpec.from_file(args.dist)
    except (OSError, ValueError) as exc:
        raise PipelineError("distribution", str(exc)) from exc
    report = evaluate(dist, args.trials, args.seed, cfg, workers=args.workers)
    Path(args.output).write_text(report.to_json())
    csv_path = Path(args.output).with_suffix(".csv")
    csv_path.write_text(report.to_csv())
    for m, r in sorted(report.methods.items()):
        print(f"{m:7s} rr_accuracy={r['rr_accuracy']:.3f} hr_accuracy={r['hr_accuracy']:.3f} "
              f"failures={r['failures']}", file=sys.stderr)


def cmd_spectrum(args):
    cube = _load_cube(args)
    ns = cube.config.ns
    if cube.n_frames < ns:
        raise PipelineError("windowing", f"{cube.n_frames} frames is shorter than one window of {ns}")
    opts = PipelineOptions(hmusic=_hmusic_config(args), dacm_increment=args.dacm_increment,
                           require_confident_location=args.stage == "hmusic")
    res = run_pipeline(cube.frames(args.start, args.start + ns), opts)
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        if args.stage == "locate":
            res.loc_spectrum.to_csv(out)
        else:
            res.hmusic_spectrum.to_long_csv(out)
    finally:
        if out is not sys.stdout:
            out.close()


def build_parser():
    p = argparse.ArgumentParser(prog="vitalmusic", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def radar_opt(sp):
        sp.add_argument("--config", help="radar config file (key = value)")

    def est_opts(sp):
        sp.add_argument("--M", type=int, default=HmusicConfig.M, help="HMUSIC window length")
        sp.add_argument("--L", type=int, default=HmusicConfig.L, help="harmonics per source")
        sp.add_argument("--signal-model", choices=("real", "analytic"), default="real")
        sp.add_argument("--dacm-increment", choices=("cross", "angle"), default="cross")

    sp = sub.add_parser("simulate", help="render a scene file into a .vwcb cube")
    sp.add_argument("scene")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--frames", type=int, help="frame count (default: scene 'frames' or Ns)")
    radar_opt(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("estimate", help="estimate vital signs for every window of a cube")
    sp.add_argument("cube")
    sp.add_argument("-o", "--output", required=True, help="JSON-lines output")
    sp.add_argument("--dump-spectra", metavar="DIR")
    sp.add_argument("--stride", type=int, default=20, help="window stride in frames")
    radar_opt(sp)
    est_opts(sp)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("evaluate", help="Monte-Carlo accuracy over a scene distribution")
    sp.add_argument("dist")
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("spectrum", help="write a pseudo-spectrum as CSV")
    sp.add_argument("cube")
    sp.add_argument("--stage", choices=("locate", "hmusic"), required=True)
    sp.add_argument("--start", type=int, default=0, help="first frame of the window")
    sp.add_argument("-o", "--output")
    radar_opt(sp)
    est_opts(sp)
    sp.set_defaults(func=cmd_spectrum)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: arguments: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
