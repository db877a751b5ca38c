import json
import subprocess
import sys

import numpy as np
import pytest

from vitalmusic.cli import main
from vitalmusic.cube import read_cube, write_cube
from vitalmusic.errors import EstimationError, PipelineError
from vitalmusic.evaluate import (DistributionSpec, TrialResult, draw_scene, evaluate, run_trial,
                                 summarize)
from vitalmusic.locate import default_grids
from vitalmusic.pipeline import PipelineOptions, run_pipeline, run_session, window_starts
from vitalmusic.radar import RadarConfig, beat_to_range
from vitalmusic.scene import SceneSpec, TargetSpec, VitalModel, save_scene, synthesize

from conftest import golden_scene


def _noise_only(config, seed=0, frames=None):
    # the human is present but returns nothing
    ghost = TargetSpec(1.0, 0.0, 0.0, VitalModel(0.3, 1.2))
    return synthesize(SceneSpec([ghost], noise_sigma=1.0, seed=seed, frames=frames), config)


# --- pipeline ----------------------------------------------------------------------

def test_golden_pipeline(config, golden):
    res = run_pipeline(synthesize(golden, config))
    assert res.location.range_m == pytest.approx(1.0, abs=1e-9)
    assert res.location.theta == pytest.approx(0.0, abs=1e-12)
    assert (res.hmusic.f_r_hz, res.hmusic.f_h_hz) == (0.25, 1.2)
    assert abs(res.fft.f_r_hz - 0.25) < 0.01 and abs(res.fft.f_h_hz - 1.2) < 0.02
    assert set(res.estimates) == {"hmusic", "fft"}
    assert res.iq.values.shape == (config.ns,) and res.phase.values.shape == (config.ns,)


def test_noise_only_fails_at_locate(config):
    with pytest.raises(PipelineError) as info:
        run_pipeline(_noise_only(config))
    assert info.value.stage == "locate"
    assert str(info.value).startswith("locate: ")
    assert "low confidence" in str(info.value)


def test_stage_labels(config, golden):
    cube = synthesize(golden, config)
    with pytest.raises(PipelineError) as info:
        run_pipeline(cube, PipelineOptions(clutter_window=10 ** 6))
    assert info.value.stage == "clutter"
    from vitalmusic.hmusic import HmusicConfig
    with pytest.raises(PipelineError) as info:
        run_pipeline(cube.frames(0, 40), PipelineOptions(hmusic=HmusicConfig(M=64)))
    assert info.value.stage == "hmusic"
    assert isinstance(info.value.__cause__, (ValueError, EstimationError))


def test_clutter_20db_above_human(config):
    theta, omega = default_grids(config)
    ranges = beat_to_range(omega, config.slope)
    rng = np.random.default_rng(11)
    for trial in range(10):
        r_h, r_c = rng.uniform(0.5, 3.0), rng.uniform(0.5, 4.5)
        th_h, th_c = np.radians(rng.uniform(-45, 45)), np.radians(rng.uniform(-60, 60))
        human = TargetSpec(r_h, th_h, 1.0, VitalModel(rng.uniform(0.15, 0.5), rng.uniform(0.9, 1.8),
                                                      (2e-3, 4e-4), (3e-4, 1e-4)))
        scene = SceneSpec([human, TargetSpec(r_c, th_c, 10.0)], noise_sigma=0.1, seed=trial)
        loc = run_pipeline(synthesize(scene, config)).location
        assert abs(np.argmin(np.abs(theta - loc.theta)) - np.argmin(np.abs(theta - th_h))) <= 1
        assert abs(np.argmin(np.abs(ranges - loc.range_m)) - np.argmin(np.abs(ranges - r_h))) <= 1


def test_session_windows(config, golden):
    assert window_starts(300, 256, 20) == [0, 20, 40]
    with pytest.raises(PipelineError):
        window_starts(100, 256, 20)
    scene = SceneSpec(golden.targets, frames=300)
    out = list(run_session(synthesize(scene, config), stride=20))
    assert [s for s, _ in out] == [0, 20, 40]
    for _, res in out:
        assert (res.hmusic.f_r_hz, res.hmusic.f_h_hz) == (0.25, 1.2)


def test_session_reports_failures_per_window(config):
    out = list(run_session(_noise_only(config, frames=276), stride=20))
    assert len(out) == 2
    assert all(isinstance(r, PipelineError) and r.stage == "locate" for _, r in out)


# --- evaluate ----------------------------------------------------------------------

def test_zero_noise_distribution_exact():
    # exact demodulation; the literal DACM step compresses fast breathing
    dist = DistributionSpec(snr_db=(300.0, 300.0), dacm_increment="angle")
    report = evaluate(dist, 12, seed=3)
    assert report.methods["hmusic"]["rr_accuracy"] == 1.0
    assert report.methods["hmusic"]["hr_accuracy"] == 1.0
    assert report.localization["exact_cell"] == 1.0


def test_single_trial_report_matches_trial():
    dist = DistributionSpec()
    report, trials = evaluate(dist, 1, seed=5, return_trials=True)
    assert report.n_trials == 1 and len(trials) == 1
    t = trials[0]
    for m in ("hmusic", "fft"):
        assert report.methods[m]["rr_accuracy"] == float(t.error(m, "rr") < 3.0)
        assert report.methods[m]["hr_accuracy"] == float(t.error(m, "hr") < 5.0)


def test_evaluate_rejects_zero_trials():
    with pytest.raises(ValueError):
        evaluate(DistributionSpec(), 0, seed=1)


def test_failed_trial_counts_as_miss():
    t = TrialResult(0, 0, 15.0, 72.0, 20.0, failure="locate: no peak")
    ok = TrialResult(1, 0, 15.0, 72.0, 20.0, est={"hmusic": {"rr_bpm": 15.5, "hr_bpm": 80.0},
                                                  "fft": {"rr_bpm": 15.0, "hr_bpm": 72.0}})
    rep = summarize([t, ok], 2, 0)
    assert rep.methods["hmusic"]["rr_accuracy"] == 0.5
    assert rep.methods["hmusic"]["hr_accuracy"] == 0.0
    assert rep.methods["hmusic"]["failures"] == 1
    assert rep.methods["fft"]["hr_error_percentiles"]["95"] is None
    json.loads(rep.to_json())
    assert rep.to_csv().splitlines()[0] == "method,metric,percentile,error_bpm"


def test_report_deterministic_and_worker_independent():
    dist = DistributionSpec()
    a = evaluate(dist, 3, seed=42).to_json()
    b = evaluate(dist, 3, seed=42).to_json()
    c = evaluate(dist, 3, seed=42, workers=2).to_json()
    assert a == b == c
    assert evaluate(dist, 3, seed=43).to_json() != a


def test_draw_scene_ranges(config):
    dist = DistributionSpec()
    rng = np.random.default_rng(0)
    for _ in range(50):
        s = draw_scene(dist, rng, config)
        h = s.human
        assert 0.15 <= h.vital.f_r <= 0.5 and 0.9 <= h.vital.f_h <= 1.8
        assert 0.5 <= h.range_m <= 3.0 and abs(np.degrees(h.theta)) <= 45
        assert 15 <= s.snr_db <= 25 and len(s.targets) == 2


def test_adversarial_draw_puts_harmonic_in_heart_band(config):
    dist = DistributionSpec(n_harmonics=3, hmusic_L=3, interferer_harmonic=3, f_r_hz=(0.27, 0.5))
    rng = np.random.default_rng(1)
    for _ in range(50):
        v = draw_scene(dist, rng, config).human.vital
        assert 0.8 <= 3 * v.f_r <= 2.0
        assert v.m_r[2] >= v.m_h[0]
        assert abs(v.f_h - 3 * v.f_r) >= 0.1


def test_distribution_file(tmp_path):
    p = tmp_path / "dist.txt"
    p.write_text("# trials\nf_r_hz = 0.2, 0.3\nsnr_db = 20\nclutter_count = 2\nnv = 4\n")
    dist, cfg = DistributionSpec.from_file(p)
    assert dist.f_r_hz == (0.2, 0.3) and dist.snr_db == (20.0, 20.0) and dist.clutter_count == 2
    assert cfg == RadarConfig(nv=4)
    p.write_text("warp_factor = 9\n")
    with pytest.raises(ValueError):
        DistributionSpec.from_file(p)


def test_run_trial_records_truth(config):
    seq = np.random.SeedSequence(0).spawn(1)[0]
    (t,) = run_trial((0, seq, DistributionSpec(), config))
    assert t.truth_rr_bpm > 0 and t.loc_error_cells is not None
    assert set(t.est) == {"hmusic", "fft"}


# --- CLI ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def golden_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    scene = d / "scene.txt"
    save_scene(scene, golden_scene())
    return d, scene


def test_cli_simulate_estimate_spectrum(golden_files, capsys):
    d, scene = golden_files
    cube = d / "g.vwcb"
    assert main(["simulate", str(scene), "-o", str(cube), "--frames", "296"]) == 0
    assert read_cube(cube).n_frames == 296
    out = d / "r.jsonl"
    assert main(["estimate", str(cube), "-o", str(out), "--dump-spectra", str(d / "sp")]) == 0
    recs = [json.loads(line) for line in out.read_text().splitlines()]
    assert [r["window_start"] for r in recs] == [0, 20, 40]
    assert recs[0]["hmusic"]["f_r_hz"] == 0.25 and recs[0]["hmusic"]["f_h_hz"] == 1.2
    assert recs[0]["range_m"] == pytest.approx(1.0)
    names = sorted(p.name for p in (d / "sp").iterdir())
    assert "locate_00000.csv" in names and "hmusic_heart_00020.csv" in names and "phase_00040.csv" in names
    capsys.readouterr()
    assert main(["spectrum", str(cube), "--stage", "hmusic"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("source,f_hz,value")
    assert main(["spectrum", str(cube), "--stage", "locate", "-o", str(d / "loc.csv")]) == 0
    assert (d / "loc.csv").read_text().startswith("theta_rad,omega_rad_s,range_m,value")


def test_cli_noise_only_exit_code(tmp_path, config):
    cube = tmp_path / "n.vwcb"
    write_cube(cube, _noise_only(config))
    proc = subprocess.run([sys.executable, "-m", "vitalmusic", "estimate", str(cube), "-o",
                           str(tmp_path / "r.jsonl")], capture_output=True, text=True)
    assert proc.returncode != 0
    assert "estimate:" in proc.stderr
    rec = json.loads((tmp_path / "r.jsonl").read_text().splitlines()[0])
    assert rec["stage"] == "locate"
    proc = subprocess.run([sys.executable, "-m", "vitalmusic", "spectrum", str(cube), "--stage",
                           "hmusic"], capture_output=True, text=True)
    assert proc.returncode != 0 and "locate:" in proc.stderr


def test_cli_bad_inputs(tmp_path, capsys):
    assert main(["simulate", str(tmp_path / "missing.txt"), "-o", str(tmp_path / "x.vwcb")]) == 1
    assert "scene:" in capsys.readouterr().err
    (tmp_path / "junk.vwcb").write_bytes(b"nope")
    assert main(["estimate", str(tmp_path / "junk.vwcb"), "-o", str(tmp_path / "r.jsonl")]) == 1
    assert "read:" in capsys.readouterr().err


def test_cli_evaluate(tmp_path):
    dist = tmp_path / "dist.txt"
    dist.write_text("snr_db = 20, 25\n")
    for name in ("a", "b"):
        assert main(["evaluate", str(dist), "--trials", "2", "--seed", "9", "-o",
                     str(tmp_path / f"{name}.json")]) == 0
    a, b = (tmp_path / "a.json").read_bytes(), (tmp_path / "b.json").read_bytes()
    assert a == b
    rep = json.loads(a)
    assert rep["n_trials"] == 2 and set(rep["methods"]) == {"hmusic", "fft"}
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
