import numpy as np
import pytest

from tiqflash import codes as cod
from tiqflash import devices as dev
from tiqflash import metrics as met
from tiqflash.errors import DegenerateResolutionError

from helpers import make_bank, random_monotone_bank


# ---------------------------------------------------------------- linearity


def test_uniform_thresholds_have_no_error():
    ideal = np.linspace(1.0, 2.0, 15)
    rep = met.linearity(make_bank(ideal, ideal, n_bits=4))
    assert len(rep.dnl) == 14
    assert len(rep.inl) == 15
    assert rep.inl[0] == 0.0
    assert max(abs(x) for x in rep.dnl) <= 1e-12
    assert rep.max_abs_dnl <= 1e-12
    assert rep.max_abs_inl <= 1e-12


def test_displaced_rung_exact_values():
    # Power-of-two spacing keeps the arithmetic exact: one rung moved up
    # by half a step makes the gap below it 1.5 steps and the gap above
    # 0.5 steps.
    base = [1.0 + 0.125 * i for i in range(15)]
    moved = list(base)
    moved[7] += 0.0625
    rep = met.linearity(make_bank(moved, base, n_bits=4))
    assert rep.v_lsb_used == 0.125
    assert rep.dnl[6] == 0.5
    assert rep.dnl[7] == -0.5
    assert all(d == 0.0 for i, d in enumerate(rep.dnl) if i not in (6, 7))
    assert rep.inl[7] == 0.5
    assert rep.max_abs_inl == 0.5
    assert rep.inl[14] == 0.0


def test_endpoint_identities_on_random_banks():
    rng = np.random.default_rng(23)
    for _ in range(50):
        bank = random_monotone_bank(rng)
        rep = met.linearity(bank)
        assert abs(sum(rep.dnl)) <= 1e-9
        assert rep.inl[0] == 0.0
        assert abs(rep.inl[-1]) <= 1e-9


def test_inl_matches_direct_definition():
    rng = np.random.default_rng(29)
    bank = random_monotone_bank(rng, n_bits=5)
    rep = met.linearity(bank)
    v = bank.thresholds()
    v_lsb = rep.v_lsb_used
    for i in range(len(v)):
        direct = (v[i] - v[0]) / v_lsb - i
        assert rep.inl[i] == pytest.approx(direct, abs=1e-9)


def test_dnl_bounded_below_for_monotone_banks():
    rng = np.random.default_rng(31)
    for _ in range(10):
        rep = met.linearity(random_monotone_bank(rng))
        assert all(d > -1.0 for d in rep.dnl)


def test_default_bank_linearity(default_bank):
    rep = met.linearity(default_bank)
    assert rep.max_abs_dnl <= 0.5
    assert rep.v_lsb_used == pytest.approx(default_bank.ladder.v_lsb, rel=5e-3)


# ---------------------------------------------------------------- full scale


def test_full_scale_reads_endpoints():
    ideal = np.linspace(1.1, 1.9, 7)
    lo, hi = met.full_scale(make_bank(ideal, ideal, n_bits=3))
    assert (lo, hi) == (1.1, 1.9)


def test_full_scale_near_gain_target(default_bank):
    lo, hi = met.full_scale(default_bank)
    want = 2.5 / 38.70
    assert abs((hi - lo) - want) <= 2.0 * default_bank.ladder.v_lsb


# ---------------------------------------------------------------- drift


def test_drift_zero_at_reference(default_bank, default_params):
    rep = met.temperature_drift(default_bank, default_params, [25.0])
    assert rep.t_ref_c == 25.0
    entry = rep.entries[0]
    assert entry.t_c == 25.0
    assert entry.max_ref_shift == 0.0
    assert entry.v_low == pytest.approx(default_bank.thresholds()[0], abs=5e-4)


def test_drift_zero_with_disabled_coefficients():
    from helpers import flat_params

    p = flat_params()  # kappa_vt = 0, m_mu = 0
    ideal = np.linspace(1.1, 1.4, 7)
    bank = make_bank(ideal, ideal, n_bits=3)
    rep = met.temperature_drift(bank, p, [-40.0, 25.0, 125.0])
    assert all(e.max_ref_shift == 0.0 for e in rep.entries)


def test_drift_matches_independent_recomputation(default_bank, default_params):
    temps = [-20.0, 120.0]
    rep = met.temperature_drift(default_bank, default_params, temps)
    for entry in rep.entries:
        q = dev.apply_temperature(default_params, entry.t_c)
        shifts = []
        lows, highs = [], []
        for d in default_bank.designs:
            spec = dev.inverter(d.wp, d.wn, d.l, default_bank.vdd)
            now = dev.inverter_threshold(spec, q)
            ref = dev.inverter_threshold(spec, default_params)
            shifts.append(abs(now - ref))
            lows.append(now)
        assert entry.max_ref_shift == pytest.approx(max(shifts), abs=1e-12)
        assert entry.v_low == pytest.approx(min(lows), abs=1e-12)
        assert entry.v_high == pytest.approx(max(lows), abs=1e-12)


def test_drift_known_magnitudes(default_bank, default_params):
    rep = met.temperature_drift(default_bank, default_params, [-20.0, 25.0, 120.0])
    shifts = {e.t_c: e.max_ref_shift for e in rep.entries}
    assert shifts[25.0] == 0.0
    assert shifts[-20.0] == pytest.approx(0.001741, abs=5e-5)
    assert shifts[120.0] == pytest.approx(0.003675, abs=5e-5)


# ---------------------------------------------------------------- latency


def test_latency_bound_values():
    assert met.encoder_latency_bound(2) == 2
    assert met.encoder_latency_bound(3) == 3
    assert met.encoder_latency_bound(6) == 6


def test_latency_bound_rejects_degenerate():
    with pytest.raises(DegenerateResolutionError):
        met.encoder_latency_bound(1)


def test_latency_bound_consistent_with_built_trees():
    for n in range(2, 11):
        stats = cod.netlist_stats(cod.build_fat_tree(n))
        assert met.encoder_latency_bound(n) == 1 + max(stats.or_depth_per_output)
