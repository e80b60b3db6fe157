import json
import math
from dataclasses import replace

import numpy as np
import pytest

from tiqflash import devices as dev
from tiqflash.errors import (
    IdealDeviceError,
    InvalidGeometryError,
    NumericalFailureError,
    OutOfModelRangeError,
    ParameterError,
    ParseError,
)

from helpers import flat_params, random_flat_params


# ---------------------------------------------------------------- ratio


def test_beta_ratio_cancels_to_one():
    p = flat_params(mu_n=400.0, mu_p=100.0)
    assert dev.beta_ratio(p, wp=4.0, wn=1.0) == 1.0


def test_beta_ratio_sqrt_of_mobility_ratio():
    p = flat_params(mu_n=400.0, mu_p=100.0)
    assert dev.beta_ratio(p, wp=1.0, wn=1.0) == 0.5


def test_beta_ratio_against_direct_formula():
    p = flat_params()
    expect = math.sqrt(150.0 * 2.0) / math.sqrt(400.0 * 1.0)
    assert dev.beta_ratio(p, wp=2.0, wn=1.0) == pytest.approx(expect, abs=1e-15)
    assert dev.beta_ratio(p, wp=2.0, wn=1.0) == pytest.approx(0.8660254037844386, abs=1e-15)


def test_geometry_rejects_nonpositive_dimensions():
    with pytest.raises(InvalidGeometryError):
        dev.TransistorGeom(w=0.0, l=0.25)
    with pytest.raises(InvalidGeometryError):
        dev.TransistorGeom(w=1.0, l=-0.1)
    with pytest.raises(InvalidGeometryError):
        dev.inverter(wp=-1.0, wn=1.0, l=0.25, vdd=2.5)
    with pytest.raises(InvalidGeometryError):
        dev.beta_ratio(flat_params(), wp=0.0, wn=1.0)


def test_inverter_spec_rejects_bad_vdd():
    with pytest.raises(ParameterError):
        dev.inverter(wp=1.0, wn=1.0, l=0.25, vdd=0.0)


# ---------------------------------------------------------------- threshold


def test_threshold_symmetric_device_sits_at_midrail():
    p = flat_params(mu_n=400.0, mu_p=400.0, vtn=0.5, vtp_mag=0.5,
                    kprime_n=110.0, kprime_p=110.0)
    spec = dev.inverter(wp=1.0, wn=1.0, l=0.25, vdd=2.5)
    assert dev.inverter_threshold(spec, p) == pytest.approx(1.25, abs=1e-15)
    assert dev.balanced_threshold(2.5, p) == pytest.approx(1.25, abs=1e-15)


def test_threshold_known_value():
    # Closed form for wp/wn = 2 at 2.5 V with the flat parameter set.
    p = flat_params()
    spec = dev.inverter(wp=2.0, wn=1.0, l=0.25, vdd=2.5)
    v = dev.inverter_threshold(spec, p)
    r = math.sqrt((150.0 * 2.0) / (400.0 * 1.0))
    assert v == pytest.approx((r * (2.5 - 0.40) + 0.43) / (1.0 + r), abs=1e-15)
    assert v == pytest.approx(1.2050496972800502, abs=1e-12)


def test_threshold_matches_vtc_crossing_on_known_value():
    p = flat_params()
    spec = dev.inverter(wp=2.0, wn=1.0, l=0.25, vdd=2.5)
    closed = dev.inverter_threshold(spec, p)
    solved = dev.vtc_crossing(spec, p)
    assert abs(closed - solved) <= 1e-6


def test_threshold_skews_toward_strong_device():
    p = flat_params()
    lo = dev.inverter_threshold(dev.inverter(0.5, 20.0, 0.25, 2.5), p)
    hi = dev.inverter_threshold(dev.inverter(20.0, 0.5, 0.25, 2.5), p)
    mid = dev.balanced_threshold(2.5, p)
    assert lo < mid < hi


def test_threshold_monotone_in_each_width():
    p = flat_params()
    rng = np.random.default_rng(7)
    for _ in range(20):
        wp = rng.uniform(0.5, 10.0)
        wn = rng.uniform(0.5, 10.0)
        base = dev.inverter_threshold(dev.inverter(wp, wn, 0.25, 2.5), p)
        up = dev.inverter_threshold(dev.inverter(wp * 1.3, wn, 0.25, 2.5), p)
        dn = dev.inverter_threshold(dev.inverter(wp, wn * 1.3, 0.25, 2.5), p)
        assert up > base > dn


def test_threshold_stays_inside_conduction_band():
    p = flat_params()
    for wp, wn in [(0.5, 20.0), (20.0, 0.5), (3.3, 7.1)]:
        v = dev.inverter_threshold(dev.inverter(wp, wn, 0.25, 2.5), p)
        assert p.vtn < v < 2.5 - p.vtp_mag


def test_threshold_rejects_rail_too_low_for_conduction():
    p = flat_params()  # vtn + |vtp| = 0.83
    spec = dev.inverter(wp=1.0, wn=1.0, l=0.25, vdd=0.8)
    with pytest.raises(ParameterError):
        dev.inverter_threshold(spec, p)


# ---------------------------------------------------------------- VTC solver


def test_vtc_pins_rails_and_falls_monotonically(default_params):
    spec = dev.inverter(wp=2.0, wn=1.0, l=0.25, vdd=2.5)
    curve = dev.vtc(spec, default_params, grid_points=201)
    assert curve.v_out[0] == 2.5
    assert curve.v_out[-1] == 0.0
    assert np.all(np.diff(curve.v_in) > 0)
    assert np.all(np.diff(curve.v_out) <= 1e-9)
    assert np.all((curve.v_out >= 0.0) & (curve.v_out <= 2.5))
    assert len(curve.samples()) == 201


def test_vtc_rejects_degenerate_grid(default_params):
    spec = dev.inverter(wp=2.0, wn=1.0, l=0.25, vdd=2.5)
    with pytest.raises(ParameterError):
        dev.vtc(spec, default_params, grid_points=2)


def test_vtc_point_agrees_with_vector_solver(default_params):
    # Two solver routes (scalar bisection and the vectorized one) must land
    # on the same answer; neither may drift from the other.
    spec = dev.inverter(wp=3.0, wn=2.0, l=0.25, vdd=2.5)
    rng = np.random.default_rng(11)
    v_in = rng.uniform(0.0, 2.5, size=50)
    vec = dev._solve_vout(spec, default_params, v_in)
    for x, want in zip(v_in, vec):
        assert dev.vtc_point(spec, default_params, float(x)) == pytest.approx(want, abs=1e-12)


def test_vtc_crossing_symmetric_device_at_midrail():
    p = flat_params(mu_n=400.0, mu_p=400.0, vtn=0.5, vtp_mag=0.5,
                    kprime_n=110.0, kprime_p=110.0)
    spec = dev.inverter(wp=1.0, wn=1.0, l=0.25, vdd=2.5)
    assert dev.vtc_crossing(spec, p) == pytest.approx(1.25, abs=1e-9)


def test_crossing_tracks_closed_form_without_channel_modulation():
    rng = np.random.default_rng(1234)
    worst = 0.0
    for _ in range(40):
        params, vdd = random_flat_params(rng)
        wp = rng.uniform(0.5, 20.0)
        wn = rng.uniform(0.5, 20.0)
        spec = dev.inverter(wp, wn, 0.25, vdd)
        closed = dev.inverter_threshold(spec, params)
        solved = dev.vtc_crossing(spec, params)
        worst = max(worst, abs(closed - solved))
    assert worst <= 1e-6


def test_channel_modulation_shifts_crossing_slightly(default_params):
    # With lambda > 0 the solved crossing moves off the closed form, but
    # only by a small fraction of the conduction band.
    spec = dev.inverter(wp=2.0, wn=1.0, l=0.25, vdd=2.5)
    closed = dev.inverter_threshold(spec, default_params)
    solved = dev.vtc_crossing(spec, default_params)
    assert 0.0 < abs(closed - solved) < 5e-3


def test_cascade_response_is_composition(default_params):
    a = dev.inverter(wp=2.0, wn=1.0, l=0.25, vdd=2.5)
    b = dev.inverter(wp=1.0, wn=2.0, l=0.25, vdd=2.5)
    x = 1.21
    one = dev.vtc_point(a, default_params, x)
    two = dev.vtc_point(b, default_params, one)
    assert dev.cascade_response((a, b), default_params, x) == pytest.approx(two, abs=1e-12)
    arr = dev.cascade_response((a, b), default_params, np.array([x, 0.0, 2.5]))
    assert arr.shape == (3,)
    assert arr[0] == pytest.approx(two, abs=1e-12)


def test_comparator_response_saturates_at_rails(default_params):
    inv = dev.inverter(wp=2.9, wn=1.0, l=0.25, vdd=2.5)
    assert dev.comparator_dc_response(inv, inv, default_params, 0.0) == 0.0
    assert dev.comparator_dc_response(inv, inv, default_params, 2.5) == 2.5


def test_comparator_swings_within_ten_steps(default_params, default_bank):
    # Ten reference steps away from its threshold, a comparator chain with
    # boosters must sit within 1% of the proper rail.
    d = default_bank.designs[31]
    inv = dev.inverter(d.wp, d.wn, d.l, default_bank.vdd)
    boost = dev.inverter(0.5, 0.5, 0.25, default_bank.vdd)
    chain = (inv, inv, boost, boost)
    step = 10.0 * default_bank.ladder.v_lsb
    lo = dev.cascade_response(chain, default_params, d.v_ref_achieved - step)
    hi = dev.cascade_response(chain, default_params, d.v_ref_achieved + step)
    assert abs(lo - 0.0) <= 0.01 * 2.5
    assert abs(hi - 2.5) <= 0.01 * 2.5


# ---------------------------------------------------------------- gain


def test_gain_requires_channel_length_modulation():
    p = flat_params()
    spec = dev.inverter(wp=2.0, wn=1.0, l=0.25, vdd=2.5)
    with pytest.raises(IdealDeviceError):
        dev.gain_at_threshold(spec, p)


def test_gain_is_negative_and_matches_slope(default_params):
    spec = dev.inverter(wp=8.0, wn=3.0, l=0.25, vdd=2.5)
    av = dev.gain_at_threshold(spec, default_params)
    assert av < -1.0
    vx = dev.vtc_crossing(spec, default_params)
    h = 1e-5
    slope = (dev.vtc_point(spec, default_params, vx + h)
             - dev.vtc_point(spec, default_params, vx - h)) / (2.0 * h)
    assert av == pytest.approx(slope, rel=0.05)


def test_gain_known_value(default_params):
    spec = dev.inverter(wp=8.0, wn=3.0, l=0.25, vdd=2.5)
    assert dev.gain_at_threshold(spec, default_params) == pytest.approx(-39.92, abs=0.05)


# ---------------------------------------------------------------- temperature


def test_temperature_identity_at_reference(default_params):
    assert dev.apply_temperature(default_params, default_params.t_ref_c) is default_params


def test_temperature_noop_with_disabled_coefficients():
    p = flat_params()  # kappa_vt = 0, m_mu = 0
    q = dev.apply_temperature(p, 125.0)
    assert q.vtn == p.vtn
    assert q.vtp_mag == p.vtp_mag
    assert q.mu_n == p.mu_n
    assert q.kprime_p == p.kprime_p


def test_temperature_shifts_thresholds_linearly(default_params):
    q = dev.apply_temperature(default_params, 125.0)
    assert q.vtn == pytest.approx(0.33, abs=1e-12)
    assert q.vtp_mag == pytest.approx(0.30, abs=1e-12)
    assert q.t_ref_c == default_params.t_ref_c


def test_temperature_scales_mobility_and_gain_factor(default_params):
    q = dev.apply_temperature(default_params, 125.0)
    scale = ((125.0 + 273.15) / (25.0 + 273.15)) ** -1.5
    assert q.mu_n == pytest.approx(400.0 * scale, rel=1e-12)
    assert q.mu_p == pytest.approx(150.0 * scale, rel=1e-12)
    assert q.kprime_n == pytest.approx(110.0 * scale, rel=1e-12)
    assert q.kprime_p == pytest.approx(41.25 * scale, rel=1e-12)
    # the threshold ratio r depends on mobility ratios only, so the
    # closed-form shift comes purely from the vt terms
    assert dev.beta_ratio(q, 2.0, 1.0) == pytest.approx(
        dev.beta_ratio(default_params, 2.0, 1.0), rel=1e-12)


def test_temperature_rejects_unphysical_points(default_params):
    with pytest.raises(OutOfModelRangeError):
        dev.apply_temperature(default_params, 500.0)  # vt would cross zero
    with pytest.raises(OutOfModelRangeError):
        dev.apply_temperature(default_params, -300.0)


# ---------------------------------------------------------------- parameters and presets


def test_params_reject_nonpositive_values():
    with pytest.raises(ParameterError):
        flat_params(mu_n=-1.0)
    with pytest.raises(ParameterError):
        flat_params(vtn=0.0)
    with pytest.raises(ParameterError):
        flat_params(kprime_p=0.0)


def test_params_reject_negative_lambda():
    with pytest.raises(ParameterError):
        flat_params(lambda_n=-0.01)


def test_builtin_preset_roundtrip():
    names = dev.builtin_presets()
    assert "generic-0.25u" in names
    p = dev.load_preset("generic-0.25u")
    assert p.mu_n == 400.0
    assert p.mu_p == 150.0
    assert p.vtn == 0.43
    assert p.vtp_mag == 0.40
    assert p.lambda_n == 0.06
    assert p.kappa_vt == 0.001
    assert p.m_mu == 1.5


def test_unknown_preset_name():
    with pytest.raises(ParseError):
        dev.load_preset("no-such-node")


def _write_params(path, mapping):
    path.write_text(json.dumps(mapping))
    return str(path)


def _valid_mapping():
    return dict(mu_n=400.0, mu_p=150.0, vtn=0.43, vtp_mag=0.40,
                kprime_n=110.0, kprime_p=41.25)


def test_load_params_accepts_minimal_file(tmp_path):
    p = dev.load_params(_write_params(tmp_path / "p.json", _valid_mapping()))
    assert p.lambda_n == 0.0
    assert p.t_ref_c == 25.0


def test_load_params_rejects_unknown_key(tmp_path):
    m = _valid_mapping()
    m["vt_n"] = 0.4
    with pytest.raises(ParseError, match="vt_n"):
        dev.load_params(_write_params(tmp_path / "p.json", m))


def test_load_params_rejects_missing_key(tmp_path):
    m = _valid_mapping()
    del m["kprime_p"]
    with pytest.raises(ParseError, match="kprime_p"):
        dev.load_params(_write_params(tmp_path / "p.json", m))


def test_load_params_rejects_wrong_type(tmp_path):
    m = _valid_mapping()
    m["mu_n"] = "400"
    with pytest.raises(ParseError, match="mu_n"):
        dev.load_params(_write_params(tmp_path / "p.json", m))


def test_load_params_rejects_bad_json(tmp_path):
    f = tmp_path / "p.json"
    f.write_text("{not json")
    with pytest.raises(ParseError):
        dev.load_params(str(f))


def test_preset_search_dir(tmp_path, monkeypatch):
    m = _valid_mapping()
    m["vtn"] = 0.5
    (tmp_path / "lab.json").write_text(json.dumps(m))
    monkeypatch.setenv(dev.PRESET_DIR_ENV, str(tmp_path))
    p = dev.load_preset("lab")
    assert p.vtn == 0.5


def test_preset_search_dir_shadows_builtin(tmp_path, monkeypatch):
    m = _valid_mapping()
    m["vtn"] = 0.39
    (tmp_path / "generic-0.25u.json").write_text(json.dumps(m))
    monkeypatch.setenv(dev.PRESET_DIR_ENV, str(tmp_path))
    assert dev.load_preset("generic-0.25u").vtn == 0.39
    monkeypatch.delenv(dev.PRESET_DIR_ENV)
    assert dev.load_preset("generic-0.25u").vtn == 0.43
