"""Static converter metrics computed from a sized bank.

Linearity uses the endpoint convention: the effective LSB is the
achieved full-scale span divided by 2**n - 2, DNL compares each rung
gap against it, and INL is the running sum of DNL anchored at zero on
the first rung.  Two identities follow directly and make good checks:
the DNL entries sum to zero and the INL returns to zero at the top rung.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .devices import DeviceParams, apply_temperature, inverter, inverter_threshold
from .errors import DegenerateResolutionError
from .synthesis import ComparatorBank

__all__ = [
    "LinearityReport",
    "linearity",
    "full_scale",
    "DriftEntry",
    "DriftReport",
    "temperature_drift",
    "encoder_latency_bound",
]


@dataclass(frozen=True)
class LinearityReport:
    """Endpoint DNL/INL of a bank, in LSB units."""

    v_lsb_used: float  # effective LSB from the achieved endpoints, V
    dnl: tuple  # 2**n - 2 entries, one per adjacent rung gap
    inl: tuple  # 2**n - 1 entries, inl[0] == 0 by convention
    max_abs_dnl: float
    max_abs_inl: float


def linearity(bank: ComparatorBank) -> LinearityReport:
    """Endpoint DNL/INL from the achieved thresholds."""
    v = bank.thresholds()
    v_lsb = (v[-1] - v[0]) / (v.size - 1)
    dnl = np.diff(v) / v_lsb - 1.0
    inl = np.concatenate([[0.0], np.cumsum(dnl)])
    return LinearityReport(
        v_lsb_used=float(v_lsb),
        dnl=tuple(dnl.tolist()),
        inl=tuple(inl.tolist()),
        max_abs_dnl=float(np.max(np.abs(dnl))),
        max_abs_inl=float(np.max(np.abs(inl))),
    )


def full_scale(bank: ComparatorBank) -> tuple:
    """(first threshold, last threshold): the achieved full-scale range."""
    v = bank.thresholds()
    return float(v[0]), float(v[-1])


@dataclass(frozen=True)
class DriftEntry:
    """Threshold drift of a whole bank at one operating temperature."""

    t_c: float  # degC
    v_low: float  # lowest threshold at t_c, V
    v_high: float  # highest threshold at t_c, V
    max_ref_shift: float  # largest |shift| of any threshold vs t_ref, V


@dataclass(frozen=True)
class DriftReport:
    t_ref_c: float
    entries: tuple  # of DriftEntry, in the order requested


def temperature_drift(bank: ComparatorBank, params: DeviceParams, temperatures) -> DriftReport:
    """Re-evaluate every closed-form threshold over temperature.

    ``params`` must be the process the bank was sized for, anchored at
    its own reference temperature.  Baseline thresholds are recomputed
    from the stored widths at t_ref, so the shift at t_ref is exactly
    zero regardless of how the bank was produced.
    """
    base = np.array(
        [
            inverter_threshold(inverter(d.wp, d.wn, d.l, bank.vdd), params)
            for d in bank.designs
        ]
    )
    entries = []
    for t_c in temperatures:
        p_t = apply_temperature(params, float(t_c))
        v_t = np.array(
            [
                inverter_threshold(inverter(d.wp, d.wn, d.l, bank.vdd), p_t)
                for d in bank.designs
            ]
        )
        entries.append(
            DriftEntry(
                t_c=float(t_c),
                v_low=float(v_t.min()),
                v_high=float(v_t.max()),
                max_ref_shift=float(np.max(np.abs(v_t - base))),
            )
        )
    return DriftReport(t_ref_c=params.t_ref_c, entries=tuple(entries))


def encoder_latency_bound(n_bits: int) -> int:
    """Gate levels on the encoder's critical path: one for the one-hot
    stage plus n - 1 OR levels in the fat tree."""
    if n_bits < 2:
        raise DegenerateResolutionError(n_bits)
    return 1 + (n_bits - 1)
