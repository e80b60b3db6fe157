"""Behavioral transient simulation of a full converter.

A simulation run is: stimulus samples -> comparator bank -> thermometer
code -> one-hot stage -> encoder netlist -> binary code, one record per
sample.  Comparators come in two fidelities.  Ideal mode is a strict
``v_in > v_ref`` test against each design's achieved threshold.  Analog
mode runs each sample through the DC transfer curve of the real chain
(threshold inverter, polarity inverter, then two balanced gain-booster
inverters) and digitizes the final voltage against a fixed slicing
level, which exposes the finite-gain transition band the ideal mode
hides.  Everything is quasi-static: no device capacitance, no timing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codes import BinaryCode, GateNetlist, ThermometerCode, eval_netlist_batch
from .devices import DeviceParams, InverterSpec, cascade_response, inverter
from .errors import ArityError, BubbleError, InvalidStimulusError, ParameterError
from .synthesis import ComparatorBank

__all__ = [
    "SineStimulus",
    "RampStimulus",
    "SampleStimulus",
    "generate_stimulus",
    "IdealMode",
    "AnalogMode",
    "IDEAL",
    "analog_mode",
    "default_booster",
    "DEFAULT_BOOSTER_W",
    "quantize",
    "SimRecord",
    "SimTrace",
    "simulate",
]

# Balanced gain-booster geometry used when the caller does not override it.
DEFAULT_BOOSTER_W = 0.5  # um


@dataclass(frozen=True)
class SineStimulus:
    """v(t) = offset + amplitude * sin(2 pi freq t), sampled uniformly."""

    freq_hz: float
    amplitude: float  # V
    offset: float  # V
    sample_rate: float  # samples per second
    duration: float  # s

    def __post_init__(self):
        if self.freq_hz <= 0.0:
            raise InvalidStimulusError(f"freq_hz must be positive, got {self.freq_hz!r}")
        if self.amplitude < 0.0:
            raise InvalidStimulusError(f"amplitude must be non-negative, got {self.amplitude!r}")
        _check_timebase(self.sample_rate, self.duration)


@dataclass(frozen=True)
class RampStimulus:
    """Linear sweep from v_start to v_end over the duration."""

    v_start: float  # V
    v_end: float  # V
    sample_rate: float  # samples per second
    duration: float  # s

    def __post_init__(self):
        _check_timebase(self.sample_rate, self.duration)


@dataclass(frozen=True)
class SampleStimulus:
    """Explicit voltage samples on a uniform timebase."""

    values: tuple  # of float, V
    sample_rate: float  # samples per second

    def __post_init__(self):
        if len(self.values) == 0:
            raise InvalidStimulusError("sample stimulus needs at least one value")
        if self.sample_rate <= 0.0:
            raise InvalidStimulusError(f"sample_rate must be positive, got {self.sample_rate!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


def _check_timebase(sample_rate, duration):
    if sample_rate <= 0.0:
        raise InvalidStimulusError(f"sample_rate must be positive, got {sample_rate!r}")
    if duration <= 0.0:
        raise InvalidStimulusError(f"duration must be positive, got {duration!r}")


def generate_stimulus(stim, vdd: float | None = None):
    """Render a stimulus to (t, v) arrays.

    The sample count is floor(duration * rate) + 1, so both endpoints of
    an exact-fit window are included.  When vdd is given a sine must fit
    inside [0, vdd]; a sine is also never allowed to swing below ground.
    """
    if isinstance(stim, SampleStimulus):
        v = np.array(stim.values, dtype=float)
        t = np.arange(v.size) / stim.sample_rate
        return t, v
    if not isinstance(stim, (SineStimulus, RampStimulus)):
        raise InvalidStimulusError(f"unknown stimulus type {type(stim).__name__}")
    n = int(math.floor(stim.duration * stim.sample_rate)) + 1
    t = np.arange(n) / stim.sample_rate
    if isinstance(stim, SineStimulus):
        lo = stim.offset - stim.amplitude
        hi = stim.offset + stim.amplitude
        if lo < 0.0:
            raise InvalidStimulusError(f"sine swings to {lo!r} V, below ground")
        if vdd is not None and hi > vdd:
            raise InvalidStimulusError(f"sine swings to {hi!r} V, above vdd={vdd!r}")
        return t, stim.offset + stim.amplitude * np.sin(2.0 * math.pi * stim.freq_hz * t)
    return t, np.linspace(stim.v_start, stim.v_end, n)


@dataclass(frozen=True)
class IdealMode:
    """Comparator as a perfect threshold test (strict greater-than)."""


IDEAL = IdealMode()


@dataclass(frozen=True)
class AnalogMode:
    """Comparator as the solved DC chain of four inverters.

    ``params`` is the process the bank was sized for, ``booster`` the
    geometry both gain-boost inverters share, ``digitize_at`` the final
    slicing level (conventionally vdd / 2).
    """

    params: DeviceParams
    booster: InverterSpec
    digitize_at: float  # V

    def __post_init__(self):
        if not 0.0 < self.digitize_at < self.booster.vdd:
            raise ParameterError(
                f"digitize_at must lie inside (0, vdd), got {self.digitize_at!r}"
            )


def default_booster(vdd: float, l: float = 0.25, w: float = DEFAULT_BOOSTER_W) -> InverterSpec:
    """Minimum-size balanced booster inverter."""
    return inverter(w, w, l, vdd)


def analog_mode(params: DeviceParams, vdd: float, l: float = 0.25, digitize_at: float | None = None) -> AnalogMode:
    """AnalogMode with the default booster and vdd/2 slicing level."""
    return AnalogMode(
        params=params,
        booster=default_booster(vdd, l),
        digitize_at=vdd / 2.0 if digitize_at is None else digitize_at,
    )


def _thermometer_matrix(v: np.ndarray, bank: ComparatorBank, mode) -> np.ndarray:
    """(samples, comparators) bool matrix of comparator decisions."""
    if isinstance(mode, IdealMode):
        return v[:, None] > bank.thresholds()[None, :]
    if isinstance(mode, AnalogMode):
        out = np.empty((v.size, len(bank.designs)), dtype=bool)
        for i, d in enumerate(bank.designs):
            stage = inverter(d.wp, d.wn, d.l, bank.vdd)
            chain = (stage, stage, mode.booster, mode.booster)
            out[:, i] = cascade_response(chain, mode.params, v) > mode.digitize_at
        return out
    raise ParameterError(f"unknown comparator mode {type(mode).__name__}")


def quantize(v_in: float, bank: ComparatorBank, mode=IDEAL) -> ThermometerCode:
    """Comparator bank response to a single input voltage."""
    tb = _thermometer_matrix(np.array([float(v_in)]), bank, mode)
    return ThermometerCode(tuple(tb[0].tolist()))


@dataclass(frozen=True)
class SimRecord:
    """One sample of a simulation: time, input, and both codes."""

    t: float  # s
    v_in: float  # V
    thermometer: ThermometerCode
    code: BinaryCode


@dataclass(frozen=True, eq=False)
class SimTrace:
    """A completed run; records in time order plus array views of them."""

    records: tuple  # of SimRecord

    def t(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def v_in(self) -> np.ndarray:
        return np.array([r.v_in for r in self.records])

    def codes(self) -> np.ndarray:
        return np.array([r.code.value for r in self.records], dtype=np.int64)


def simulate(bank: ComparatorBank, net: GateNetlist, stimulus, mode=IDEAL) -> SimTrace:
    """Run a stimulus through the full converter pipeline.

    The one-hot stage is computed directly from the thermometer matrix
    (top bit per sample); a bubble anywhere aborts the run with the
    sample index attached, since a real encoder would emit garbage.
    """
    m = len(bank.designs)
    if net.n_leaves != m:
        raise ArityError(f"netlist has {net.n_leaves} leaves but the bank has {m} comparators")
    t, v = generate_stimulus(stimulus, vdd=bank.vdd)
    tb = _thermometer_matrix(v, bank, mode)
    bubbles = ~tb[:, :-1] & tb[:, 1:]
    if bubbles.any():
        s, i = np.argwhere(bubbles)[0]
        raise BubbleError(int(i), sample=int(s))
    one_hot = tb & ~np.hstack([tb[:, 1:], np.zeros((tb.shape[0], 1), dtype=bool)])
    words = eval_netlist_batch(net, one_hot)
    n_bits = net.n_bits
    records = tuple(
        SimRecord(
            t=float(t[s]),
            v_in=float(v[s]),
            thermometer=ThermometerCode(tuple(tb[s].tolist())),
            code=BinaryCode(value=int(words[s]), n_bits=n_bits),
        )
        for s in range(v.size)
    )
    return SimTrace(records=records)
