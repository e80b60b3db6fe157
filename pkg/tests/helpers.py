"""Shared builders for the test suite."""

import numpy as np

from tiqflash import devices, synthesis


def flat_params(**overrides):
    """Parameters with lambda = 0 and kprime tied to mobility, so the
    closed-form threshold and the solved VTC crossing coincide."""
    base = dict(
        mu_n=400.0,
        mu_p=150.0,
        vtn=0.43,
        vtp_mag=0.40,
        kprime_n=110.0,
        kprime_p=41.25,
    )
    base.update(overrides)
    return devices.DeviceParams(**base)


def random_flat_params(rng):
    """Random valid parameter set in the lambda = 0 regime; kprime scales
    with mobility through a shared oxide factor."""
    vtn = rng.uniform(0.2, 0.7)
    vtp = rng.uniform(0.2, 0.7)
    vdd = vtn + vtp + rng.uniform(0.4, 2.5)
    mu_n = rng.uniform(100.0, 800.0)
    mu_p = rng.uniform(40.0, mu_n)
    cox = rng.uniform(0.1, 1.0)
    params = devices.DeviceParams(
        mu_n=mu_n,
        mu_p=mu_p,
        vtn=vtn,
        vtp_mag=vtp,
        kprime_n=mu_n * cox,
        kprime_p=mu_p * cox,
    )
    return params, vdd


def make_bank(achieved, ideal, n_bits, vdd=2.5, wp=None, wn=None, l=0.25):
    """Bank with explicit threshold values; widths default to placeholders."""
    m = 2**n_bits - 1
    assert len(achieved) == len(ideal) == m
    wp = wp if wp is not None else [1.0 + 0.25 * i for i in range(m)]
    wn = wn if wn is not None else [1.0] * m
    ladder = synthesis.ReferenceLadder(
        v_low=ideal[0],
        v_high=ideal[-1],
        v_lsb=(ideal[-1] - ideal[0]) / (m - 1),
        ideal_refs=tuple(ideal),
    )
    designs = tuple(
        synthesis.ComparatorDesign(
            wp=float(wp[i]), wn=float(wn[i]), l=l,
            v_ref_achieved=float(achieved[i]), v_ref_ideal=float(ideal[i]),
        )
        for i in range(m)
    )
    return synthesis.ComparatorBank(n_bits=n_bits, vdd=vdd, ladder=ladder, designs=designs)


def random_monotone_bank(rng, n_bits=None, vdd=2.5):
    """Random strictly monotone bank inside (0.5, 2.0) V."""
    if n_bits is None:
        n_bits = int(rng.integers(2, 7))
    m = 2**n_bits - 1
    lo = rng.uniform(0.5, 1.0)
    hi = lo + rng.uniform(0.05, 1.0)
    ideal = np.linspace(lo, hi, m)
    gaps = rng.uniform(0.2, 1.8, size=m - 1)
    achieved = lo + np.concatenate([[0.0], np.cumsum(gaps)]) * (hi - lo) / gaps.sum()
    return make_bank(achieved, ideal, n_bits, vdd=vdd)


def widths_for_threshold(v_ref, params, vdd=2.5, wn=1.0):
    """Invert the closed-form threshold: wp that lands an inverter at v_ref."""
    r = (v_ref - params.vtn) / ((vdd - params.vtp_mag) - v_ref)
    return r * r * (params.mu_n / params.mu_p) * wn
