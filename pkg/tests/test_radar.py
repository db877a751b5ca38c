import numpy as np
import pytest
from hypothesis import given, strategies as st

from vitalmusic.radar import (C, RadarConfig, RangeAngle, angle_steering, beat_to_range,
                              range_steering, range_to_beat)


def test_defaults_match_table(config):
    assert config.f0 == 60e9
    assert config.slope == 60e12
    assert (config.nf, config.ns, config.nv) == (240, 256, 8)
    assert config.lambda0 == pytest.approx(C / 60e9, rel=1e-15)


def test_range_resolution(config):
    # 240 samples at 0.25 us of a 60 MHz/us chirp sweep 3600 MHz
    assert config.bandwidth == pytest.approx(3.6e9)
    assert config.range_resolution == pytest.approx(0.04164, abs=5e-6)


@pytest.mark.parametrize("kwargs", [dict(nf=1), dict(ns=1), dict(nv=0), dict(ts=0.0),
                                    dict(tf=-1e-6), dict(nf=400)])
def test_config_rejects_invalid(kwargs):
    with pytest.raises(ValueError):
        RadarConfig(**kwargs)


def test_config_file_roundtrip(tmp_path, config):
    p = tmp_path / "radar.cfg"
    cfg = config.replace(nv=4, ts=0.04)
    cfg.to_file(p)
    text = p.read_text()
    for key in ("f0_hz", "slope_hz_per_s", "chirp_s", "tf_s", "ts_s", "nf", "ns", "nv", "d_over_lambda"):
        assert f"{key} = " in text
    assert RadarConfig.from_file(p) == cfg


def test_config_file_rejects_unknown_and_duplicate(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("nf = 16\nbogus = 1\n")
    with pytest.raises(ValueError, match="unknown"):
        RadarConfig.from_file(p)
    p.write_text("nf = 16\nnf = 32\n")
    with pytest.raises(ValueError, match="duplicate"):
        RadarConfig.from_file(p)


def test_angle_steering_examples():
    np.testing.assert_allclose(angle_steering(0.0, 4), np.ones(4), atol=1e-15)
    np.testing.assert_allclose(angle_steering(np.pi / 2, 2), [1, -1], atol=1e-15)
    np.testing.assert_allclose(angle_steering(np.pi / 6, 3), [1, 1j, -1], atol=1e-15)


def test_angle_steering_rejects_out_of_range():
    with pytest.raises(ValueError):
        angle_steering(np.pi / 2 + 1e-3, 4)


def test_range_steering_examples():
    np.testing.assert_allclose(range_steering(0.0, 1e-6, 3), np.ones(3))
    nf, tf = 16, 0.25e-6
    s = range_steering(2 * np.pi / (nf * tf), tf, nf)
    assert s[-1] == pytest.approx(np.exp(2j * np.pi * (nf - 1) / nf), abs=1e-12)
    with pytest.raises(ValueError):
        range_steering(-1.0, tf, nf)


def test_one_metre_beat():
    # f_b = 2 S R / c
    w = range_to_beat(1.0, 60e12)
    assert w / (2 * np.pi) == pytest.approx(2 * 60e12 * 1.0 / C, rel=1e-14)
    assert w / (2 * np.pi) == pytest.approx(4.0e5, rel=1e-3)
    assert beat_to_range(0.0, 60e12) == 0.0
    assert beat_to_range(2 * np.pi * 2 * 60e12 / C, 60e12) == pytest.approx(1.0, rel=1e-14)


@given(st.floats(0.0, 1e3), st.floats(1e9, 1e15))
def test_range_beat_roundtrip(r, slope):
    back = beat_to_range(range_to_beat(r, slope), slope)
    assert back == pytest.approx(r, rel=1e-12, abs=1e-300)


@given(st.floats(-np.pi / 2, np.pi / 2), st.integers(1, 32))
def test_angle_steering_invariants(theta, nv):
    a = angle_steering(theta, nv)
    np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-14)
    assert a[0] == 1
    assert np.vdot(a, a).real == pytest.approx(nv, rel=1e-14)
    np.testing.assert_allclose(angle_steering(-theta, nv), a.conj(), atol=1e-13)


@given(st.floats(0.0, 1.2e7), st.integers(2, 256))
def test_range_steering_unit_modulus(omega, nf):
    s = range_steering(omega, 0.25e-6, nf)
    np.testing.assert_allclose(np.abs(s), 1.0, atol=1e-14)
    assert np.vdot(s, s).real == pytest.approx(nf, rel=1e-13)


def test_vectorised_steering_rows_match_scalar():
    th = np.radians([-30.0, 0.0, 45.0])
    a = angle_steering(th, 5)
    for i, t in enumerate(th):
        np.testing.assert_array_equal(a[i], angle_steering(t, 5))


def test_range_angle(config):
    loc = RangeAngle(range_to_beat(1.5, config.slope), np.radians(10.0), config.slope)
    assert loc.range_m == pytest.approx(1.5)
    assert loc.theta_deg == pytest.approx(10.0)
    with pytest.raises(ValueError):
        RangeAngle(1.0, 2.0, config.slope)


def test_max_range(config):
    # fast-time Nyquist: f_b = 1 / (2 tf)
    expected = C / (2 * config.slope) / (2 * config.tf)
    assert config.max_range == pytest.approx(expected, rel=1e-14)
