"""Width synthesis: from converter spec to a sized comparator bank.

The flow has three steps.  ``compute_ladder`` turns resolution, supply
and comparator gain into the ideal reference ladder: the usable input
band is the supply divided by the gain magnitude, centred where the
designer wants it, and the 2**n - 1 rungs split that band uniformly.
``enumerate_candidates`` sweeps a discrete width grid and records the
closed-form threshold of every (wp, wn) pair.  ``size_comparators``
assigns one distinct candidate to each rung, nearest first, keeping the
assigned thresholds strictly increasing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .devices import DeviceParams, balanced_threshold
from .errors import (
    CoverageError,
    DegenerateResolutionError,
    InfeasibleLadderError,
    InsufficientResolutionError,
    InvalidGridError,
    ParameterError,
)

__all__ = [
    "LadderSpec",
    "ReferenceLadder",
    "compute_ladder",
    "centered_ladder_spec",
    "uniform_rungs",
    "WidthGrid",
    "DEFAULT_GRID",
    "CandidateSet",
    "enumerate_candidates",
    "ComparatorDesign",
    "ComparatorBank",
    "size_comparators",
    "BankReport",
    "bank_report",
]


@dataclass(frozen=True)
class LadderSpec:
    """What the converter must achieve, before any transistor is sized."""

    n_bits: int  # resolution
    vdd: float  # supply voltage, V
    av_mag: float  # comparator gain magnitude |A_v|
    v_center: float  # centre of the input band, V

    def __post_init__(self):
        if self.n_bits < 2:
            raise DegenerateResolutionError(self.n_bits)
        if self.vdd <= 0.0:
            raise ParameterError(f"vdd must be positive, got {self.vdd!r}")
        if self.av_mag <= 0.0:
            raise ParameterError(f"av_mag must be positive, got {self.av_mag!r}")


@dataclass(frozen=True)
class ReferenceLadder:
    """Ideal reference voltages the comparator bank should realise."""

    v_low: float  # lowest rung, V
    v_high: float  # highest rung, V
    v_lsb: float  # rung spacing, V
    ideal_refs: tuple  # all 2**n - 1 rungs, ascending, V

    @property
    def n_rungs(self) -> int:
        return len(self.ideal_refs)


def uniform_rungs(v_low: float, v_high: float, n_rungs: int) -> tuple:
    """Uniform rungs from v_low to v_high inclusive, as exact as linspace."""
    return tuple(float(v) for v in np.linspace(v_low, v_high, n_rungs))


def compute_ladder(spec: LadderSpec, params: DeviceParams | None = None) -> ReferenceLadder:
    """Derive the uniform reference ladder for a converter spec.

    The band spans vdd / av_mag centred on v_center:

        v_low  = v_center - vdd / (2 * av_mag)
        v_high = v_center + vdd / (2 * av_mag)
        v_lsb  = (v_high - v_low) / (2**n - 2)

    The band must sit strictly inside the rails, and when params are
    given, strictly inside the conduction band (vtn, vdd - |vtp|) where
    a width ratio can actually place a threshold.
    """
    half = spec.vdd / (2.0 * spec.av_mag)
    v_low = spec.v_center - half
    v_high = spec.v_center + half
    lo_bound, hi_bound = 0.0, spec.vdd
    if params is not None:
        lo_bound, hi_bound = params.vtn, spec.vdd - params.vtp_mag
    if v_low <= lo_bound or v_high >= hi_bound:
        raise InfeasibleLadderError(
            f"ladder [{v_low:.6g}, {v_high:.6g}] V does not fit inside "
            f"({lo_bound:.6g}, {hi_bound:.6g}) V"
        )
    n_rungs = 2**spec.n_bits - 1
    v_lsb = (v_high - v_low) / (n_rungs - 1)
    return ReferenceLadder(
        v_low=v_low,
        v_high=v_high,
        v_lsb=v_lsb,
        ideal_refs=uniform_rungs(v_low, v_high, n_rungs),
    )


def centered_ladder_spec(n_bits: int, vdd: float, av_mag: float, params: DeviceParams) -> LadderSpec:
    """LadderSpec centred on the balanced (r = 1) inverter threshold."""
    return LadderSpec(n_bits=n_bits, vdd=vdd, av_mag=av_mag, v_center=balanced_threshold(vdd, params))


@dataclass(frozen=True)
class WidthGrid:
    """Discrete width sweep shared by both devices; one fixed length."""

    w_min: float = 0.5  # um
    w_max: float = 20.0  # um
    w_step: float = 0.05  # um
    l_fixed: float = 0.25  # um

    def __post_init__(self):
        if self.w_min <= 0.0 or self.w_max < self.w_min or self.w_step <= 0.0:
            raise InvalidGridError(
                f"need 0 < w_min <= w_max and w_step > 0, got "
                f"w_min={self.w_min!r} w_max={self.w_max!r} w_step={self.w_step!r}"
            )
        if self.l_fixed <= 0.0:
            raise InvalidGridError(f"l_fixed must be positive, got {self.l_fixed!r}")

    def widths(self) -> np.ndarray:
        """All grid points w_min, w_min + step, ... not exceeding w_max."""
        count = int(np.floor((self.w_max - self.w_min) / self.w_step + 1e-9)) + 1
        return self.w_min + self.w_step * np.arange(count)


DEFAULT_GRID = WidthGrid()


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Every (wp, wn) pair on a grid with its closed-form threshold.

    ``table`` has one row per pair, columns (wp, wn, v_ref), sorted by
    v_ref then wp then wn.  The constructor normalises the order so a
    hand-built table behaves like an enumerated one.
    """

    table: np.ndarray
    l_fixed: float
    vdd: float

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim != 2 or t.shape[1] != 3 or t.shape[0] == 0:
            raise InvalidGridError("candidate table must be a non-empty (N, 3) array")
        order = np.lexsort((t[:, 1], t[:, 0], t[:, 2]))
        object.__setattr__(self, "table", t[order])

    def __len__(self) -> int:
        return self.table.shape[0]

    def __getitem__(self, i):
        wp, wn, v = self.table[i]
        return float(wp), float(wn), float(v)


def enumerate_candidates(grid: WidthGrid, params: DeviceParams, vdd: float) -> CandidateSet:
    """Threshold of every width pair on the grid, sorted by threshold.

    The sweep is the full cross product, so a default grid (391 widths)
    yields 391**2 pairs.  Computed vectorised; thresholds are exactly
    the values ``inverter_threshold`` returns for the same pair.
    """
    if vdd <= params.vtn + params.vtp_mag:
        raise ParameterError(
            f"vdd={vdd!r} leaves no conduction band: need vdd > vtn + |vtp| = "
            f"{params.vtn + params.vtp_mag!r}"
        )
    w = grid.widths()
    if w.size == 0:
        raise InvalidGridError("width grid is empty")
    wp, wn = np.meshgrid(w, w, indexing="ij")
    wp = wp.ravel()
    wn = wn.ravel()
    r = np.sqrt((params.mu_p * wp) / (params.mu_n * wn))
    v = (r * (vdd - params.vtp_mag) + params.vtn) / (1.0 + r)
    return CandidateSet(table=np.column_stack([wp, wn, v]), l_fixed=grid.l_fixed, vdd=vdd)


@dataclass(frozen=True)
class ComparatorDesign:
    """One sized comparator: widths, shared length and both thresholds."""

    wp: float  # PMOS width, um
    wn: float  # NMOS width, um
    l: float  # shared channel length, um
    v_ref_achieved: float  # closed-form threshold of the pair, V
    v_ref_ideal: float  # ladder rung it was assigned to, V

    @property
    def abs_error(self) -> float:
        return abs(self.v_ref_achieved - self.v_ref_ideal)


@dataclass(frozen=True)
class ComparatorBank:
    """A full flash bank: 2**n - 1 designs, thresholds strictly increasing."""

    n_bits: int
    vdd: float
    ladder: ReferenceLadder
    designs: tuple  # ComparatorDesign, ascending by v_ref_achieved

    def __post_init__(self):
        if self.n_bits < 2:
            raise DegenerateResolutionError(self.n_bits)
        expected = 2**self.n_bits - 1
        if len(self.designs) != expected:
            raise ParameterError(
                f"bank for {self.n_bits} bits needs {expected} designs, got {len(self.designs)}"
            )
        v = [d.v_ref_achieved for d in self.designs]
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ParameterError("achieved thresholds must be strictly increasing")

    def thresholds(self) -> np.ndarray:
        return np.array([d.v_ref_achieved for d in self.designs])


def _representatives(candidates: CandidateSet):
    """Collapse the table to distinct thresholds with a tie-broken width pair.

    Among pairs sharing one threshold the representative has the
    smallest total width wp + wn, then the smallest wp.
    """
    t = candidates.table
    wp, wn, v = t[:, 0], t[:, 1], t[:, 2]
    order = np.lexsort((wn, wp, wp + wn, v))
    v_sorted = v[order]
    values, first = np.unique(v_sorted, return_index=True)
    reps = t[order][first, :2]
    return values, reps


def size_comparators(
    ladder: ReferenceLadder, candidates: CandidateSet, tie_break: str = "area"
) -> ComparatorBank:
    """Assign one candidate threshold to every ladder rung.

    Rungs are walked in ascending order; each takes the remaining
    distinct threshold nearest its ideal value, constrained to lie above
    the previous rung's pick so the bank stays strictly monotonic.  An
    equidistant tie goes to the representative with the smaller total
    width, then the smaller wp, then the lower threshold.
    """
    if tie_break != "area":
        raise ParameterError(f"unknown tie_break {tie_break!r}; only 'area' is supported")
    values, reps = _representatives(candidates)
    n_rungs = ladder.n_rungs
    if values.size < n_rungs:
        raise InsufficientResolutionError(
            f"grid offers {values.size} distinct thresholds but the ladder has {n_rungs} rungs"
        )
    if values[0] > ladder.v_low or values[-1] < ladder.v_high:
        uncovered = [
            i
            for i, rung in enumerate(ladder.ideal_refs)
            if rung < values[0] or rung > values[-1]
        ]
        raise CoverageError(
            f"candidate thresholds [{values[0]:.6g}, {values[-1]:.6g}] V do not cover "
            f"the ladder [{ladder.v_low:.6g}, {ladder.v_high:.6g}] V",
            uncovered=uncovered,
        )
    used = np.zeros(values.size, dtype=bool)
    designs = []
    floor_idx = 0  # values below this index are <= the previous pick
    for rung_i, rung in enumerate(ladder.ideal_refs):
        j = int(np.searchsorted(values, rung))
        # nearest unused candidate to the left, not below the floor
        left = None
        k = min(j - 1, values.size - 1)
        while k >= floor_idx:
            if not used[k]:
                left = k
                break
            k -= 1
        # nearest unused candidate at or to the right of the insertion point
        right = None
        k = max(j, floor_idx)
        while k < values.size:
            if not used[k]:
                right = k
                break
            k += 1
        if left is None and right is None:
            raise InsufficientResolutionError(
                f"no unused candidate threshold remains for rung {rung_i} at {rung:.6g} V"
            )
        if left is None:
            pick = right
        elif right is None:
            pick = left
        else:
            d_left = rung - values[left]
            d_right = values[right] - rung
            if d_left < d_right:
                pick = left
            elif d_right < d_left:
                pick = right
            else:
                # exact tie: prefer the smaller area, then smaller wp, then lower v_ref
                al = reps[left][0] + reps[left][1]
                ar = reps[right][0] + reps[right][1]
                if al != ar:
                    pick = left if al < ar else right
                elif reps[left][0] != reps[right][0]:
                    pick = left if reps[left][0] < reps[right][0] else right
                else:
                    pick = left
        used[pick] = True
        floor_idx = pick + 1
        designs.append(
            ComparatorDesign(
                wp=float(reps[pick][0]),
                wn=float(reps[pick][1]),
                l=candidates.l_fixed,
                v_ref_achieved=float(values[pick]),
                v_ref_ideal=float(rung),
            )
        )
    n_bits = int(np.log2(n_rungs + 1))
    return ComparatorBank(n_bits=n_bits, vdd=candidates.vdd, ladder=ladder, designs=tuple(designs))


@dataclass(frozen=True)
class BankReport:
    """Summary numbers for a sized bank."""

    n_bits: int
    n_designs: int
    v_ref_min: float  # V
    v_ref_max: float  # V
    max_abs_error: float  # V
    max_abs_error_lsb: float
    monotonic: bool
    total_width: float  # sum of wp + wn over the bank, um


def bank_report(bank: ComparatorBank) -> BankReport:
    """Recompute the summary from the designs (monotonicity included)."""
    v = bank.thresholds()
    errs = np.array([d.abs_error for d in bank.designs])
    return BankReport(
        n_bits=bank.n_bits,
        n_designs=len(bank.designs),
        v_ref_min=float(v[0]),
        v_ref_max=float(v[-1]),
        max_abs_error=float(errs.max()),
        max_abs_error_lsb=float(errs.max() / bank.ladder.v_lsb),
        monotonic=bool(np.all(np.diff(v) > 0.0)),
        total_width=float(sum(d.wp + d.wn for d in bank.designs)),
    )
