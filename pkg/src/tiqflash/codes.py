"""Digital back end: thermometer code in, binary code out.

The comparator bank produces a thermometer code t[0..m-1] (m = 2**n - 1,
bit i high when the input exceeds threshold i).  A one-hot stage keeps
only the topmost high bit, a[i] = t[i] AND NOT t[i+1] with a virtual
t[m] = 0, so a[i] hot means binary value i + 1 and the all-zero word
means 0.  Each binary output bit is then just the OR of the one-hot
lines whose value has that bit set, built as a balanced tree of 2-input
ORs: 2**(n-1) leaves, 2**(n-1) - 1 gates and n - 1 levels per bit.

Gate netlists are tiny DAGs over string references: ``I<k>`` is leaf k,
``G<id>`` the output of an earlier gate.  Everything here is plain
combinational evaluation; no timing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ArityError,
    BubbleError,
    DegenerateResolutionError,
    InvalidOneHotError,
    ParameterError,
)

__all__ = [
    "ThermometerCode",
    "OneHotCode",
    "BinaryCode",
    "Gate",
    "GateNetlist",
    "GATE_KINDS",
    "one_hot_from_thermometer",
    "build_fat_tree",
    "eval_netlist",
    "eval_netlist_batch",
    "rom_encoder_oracle",
    "NetlistStats",
    "netlist_stats",
]


@dataclass(frozen=True)
class ThermometerCode:
    """Raw comparator outputs, bit i for threshold i.  May contain bubbles."""

    bits: tuple  # of bool

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(bool(b) for b in self.bits))

    @classmethod
    def from_level(cls, level: int, m: int) -> "ThermometerCode":
        """Well-formed code with the lowest ``level`` bits set."""
        if not 0 <= level <= m:
            raise ParameterError(f"level must be in [0, {m}], got {level}")
        return cls(tuple(i < level for i in range(m)))

    def popcount(self) -> int:
        return sum(self.bits)

    def first_bubble(self):
        """Index of the first 0 followed by a 1, or None if well formed."""
        for i in range(len(self.bits) - 1):
            if not self.bits[i] and self.bits[i + 1]:
                return i
        return None

    def is_well_formed(self) -> bool:
        return self.first_bubble() is None


@dataclass(frozen=True)
class OneHotCode:
    """At most one bit set; bit i hot encodes the value i + 1."""

    bits: tuple  # of bool

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(bool(b) for b in self.bits))

    def hot_index(self):
        """Index of the single set bit, or None for the all-zero word."""
        self.validate()
        for i, b in enumerate(self.bits):
            if b:
                return i
        return None

    def validate(self) -> None:
        if sum(self.bits) > 1:
            raise InvalidOneHotError(f"{sum(self.bits)} bits set in a one-hot word")


@dataclass(frozen=True)
class BinaryCode:
    """An n-bit unsigned output word."""

    value: int
    n_bits: int

    def __post_init__(self):
        if self.n_bits < 1:
            raise ParameterError(f"n_bits must be >= 1, got {self.n_bits!r}")
        if not 0 <= self.value < 2**self.n_bits:
            raise ParameterError(f"value {self.value!r} out of range for {self.n_bits} bits")

    def bit(self, k: int) -> bool:
        return bool((self.value >> k) & 1)


GATE_KINDS = {"OR2": 2, "AND2": 2, "NAND2": 2, "NOT": 1}


@dataclass(frozen=True)
class Gate:
    """One gate: integer id, kind, and input references (I<k> or G<id>)."""

    gid: int
    kind: str
    inputs: tuple  # of str

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ParameterError(f"unknown gate kind {self.kind!r}")
        if len(self.inputs) != GATE_KINDS[self.kind]:
            raise ArityError(
                f"{self.kind} takes {GATE_KINDS[self.kind]} inputs, got {len(self.inputs)}"
            )

    @property
    def ref(self) -> str:
        return f"G{self.gid}"


def _check_ref(ref: str, n_leaves: int, seen_gids: set) -> None:
    if ref.startswith("I"):
        idx = int(ref[1:])
        if not 0 <= idx < n_leaves:
            raise ParameterError(f"leaf reference {ref!r} out of range (n_leaves={n_leaves})")
    elif ref.startswith("G"):
        if int(ref[1:]) not in seen_gids:
            raise ParameterError(f"gate reference {ref!r} does not point at an earlier gate")
    else:
        raise ParameterError(f"malformed reference {ref!r}")


@dataclass(frozen=True)
class GateNetlist:
    """Combinational DAG in topological order; outputs[k] drives bit k."""

    n_leaves: int
    gates: tuple  # of Gate, ids strictly increasing
    outputs: tuple  # of str, one reference per binary output bit

    def __post_init__(self):
        seen = set()
        for g in self.gates:
            if g.gid in seen:
                raise ParameterError(f"duplicate gate id {g.gid}")
            for ref in g.inputs:
                _check_ref(ref, self.n_leaves, seen)
            seen.add(g.gid)
        if not self.outputs:
            raise ParameterError("netlist needs at least one output")
        for ref in self.outputs:
            _check_ref(ref, self.n_leaves, seen)

    @property
    def n_bits(self) -> int:
        return len(self.outputs)


def one_hot_from_thermometer(t: ThermometerCode) -> OneHotCode:
    """Keep only the topmost high bit: a[i] = t[i] AND NOT t[i+1].

    The virtual bit past the top is 0, so a full-scale code stays legal.
    A bubble (0 below a 1) makes the thermometer word ambiguous and
    raises BubbleError with the first offending index.
    """
    bubble = t.first_bubble()
    if bubble is not None:
        raise BubbleError(bubble)
    bits = t.bits
    ext = bits + (False,)
    return OneHotCode(tuple(bits[i] and not ext[i + 1] for i in range(len(bits))))


def _or_tree(leaves, gates, next_gid):
    """Reduce references pairwise with OR2 gates; returns (root_ref, next_gid).

    Adjacent pairs combine left to right; an odd leftover passes up to
    the next level, so an arbitrary count yields a left-heavy tree.
    """
    level = list(leaves)
    while len(level) > 1:
        nxt = []
        for i in range(0, len(level) - 1, 2):
            g = Gate(next_gid, "OR2", (level[i], level[i + 1]))
            gates.append(g)
            nxt.append(g.ref)
            next_gid += 1
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0], next_gid


def build_fat_tree(n_bits: int, fuse_one_hot: bool = False) -> GateNetlist:
    """Balanced OR-tree encoder for an n-bit converter.

    For output bit k the leaves are the one-hot lines a[j-1] for every
    value j whose bit k is set, taken in descending j; there are always
    exactly 2**(n-1) of them, so the tree is perfectly balanced with
    n - 1 levels.  With ``fuse_one_hot`` the netlist also contains the
    AND/NOT stage and its leaves are the raw thermometer bits instead;
    the topmost line needs no gate because the virtual bit above it is
    constant 0.
    """
    if n_bits < 2:
        raise DegenerateResolutionError(n_bits)
    m = 2**n_bits - 1
    gates = []
    next_gid = 0
    if fuse_one_hot:
        line = {}
        for i in range(m - 1):
            inv = Gate(next_gid, "NOT", (f"I{i + 1}",))
            gates.append(inv)
            next_gid += 1
            g = Gate(next_gid, "AND2", (f"I{i}", inv.ref))
            gates.append(g)
            next_gid += 1
            line[i] = g.ref
        line[m - 1] = f"I{m - 1}"
    else:
        line = {i: f"I{i}" for i in range(m)}
    outputs = [None] * n_bits
    for k in range(n_bits - 1, -1, -1):
        leaves = [line[j - 1] for j in range(m, 0, -1) if (j >> k) & 1]
        assert len(leaves) == 2 ** (n_bits - 1)
        outputs[k], next_gid = _or_tree(leaves, gates, next_gid)
    return GateNetlist(n_leaves=m, gates=tuple(gates), outputs=tuple(outputs))


def _eval_refs(net: GateNetlist, leaf_values):
    """Evaluate every reference once, in netlist order.  Values may be
    scalars or numpy bool arrays; the same code serves both."""
    values = {f"I{i}": leaf_values[i] for i in range(net.n_leaves)}
    for g in net.gates:
        a = values[g.inputs[0]]
        if g.kind == "NOT":
            values[g.ref] = ~a if isinstance(a, np.ndarray) else (not a)
            continue
        b = values[g.inputs[1]]
        if g.kind == "OR2":
            values[g.ref] = a | b
        elif g.kind == "AND2":
            values[g.ref] = a & b
        else:  # NAND2
            v = a & b
            values[g.ref] = ~v if isinstance(v, np.ndarray) else (not v)
    return values


def eval_netlist(net: GateNetlist, code) -> BinaryCode:
    """Run a one-hot (or thermometer, for fused netlists) word through the DAG."""
    bits = code.bits if hasattr(code, "bits") else tuple(bool(b) for b in code)
    if len(bits) != net.n_leaves:
        raise ArityError(f"netlist has {net.n_leaves} leaves, code has {len(bits)} bits")
    values = _eval_refs(net, bits)
    word = 0
    for k, ref in enumerate(net.outputs):
        if values[ref]:
            word |= 1 << k
    return BinaryCode(value=word, n_bits=net.n_bits)


def eval_netlist_batch(net: GateNetlist, leaf_matrix: np.ndarray) -> np.ndarray:
    """Vectorised evaluation: leaf_matrix is (samples, n_leaves) bool,
    the result an int array of output words, one per sample."""
    lm = np.asarray(leaf_matrix, dtype=bool)
    if lm.ndim != 2 or lm.shape[1] != net.n_leaves:
        raise ArityError(f"leaf matrix must be (samples, {net.n_leaves}), got {lm.shape}")
    values = _eval_refs(net, [lm[:, i] for i in range(net.n_leaves)])
    words = np.zeros(lm.shape[0], dtype=np.int64)
    for k, ref in enumerate(net.outputs):
        words |= values[ref].astype(np.int64) << k
    return words


def rom_encoder_oracle(a: OneHotCode, n_bits: int) -> BinaryCode:
    """Reference encoder: scan for the hot line, emit its value directly.

    Shares no structure with the OR-tree builder, which is the point:
    the two must agree on every input.
    """
    m = 2**n_bits - 1
    if len(a.bits) != m:
        raise ArityError(f"{n_bits}-bit encoder expects {m} one-hot lines, got {len(a.bits)}")
    idx = a.hot_index()
    return BinaryCode(value=0 if idx is None else idx + 1, n_bits=n_bits)


@dataclass(frozen=True)
class NetlistStats:
    """Structural summary of an encoder netlist."""

    n_leaves: int
    n_bits: int
    or_count: int  # OR2 gates in the whole netlist
    and_count: int
    not_count: int
    nand_count: int
    or_per_output: tuple  # distinct OR2 gates reachable from each output
    or_depth_per_output: tuple  # OR2 levels on the deepest path to each output
    fused_one_hot: bool  # True when the AND/NOT stage is in the netlist


def netlist_stats(net: GateNetlist) -> NetlistStats:
    """Count and measure gate usage per output bit.

    Depth counts OR2 levels only, so the fused AND/NOT stage does not
    add to it; that stage is one extra level by construction and is
    reported through ``fused_one_hot`` instead.  NAND-mapped netlists
    therefore report zero OR depth; measure before mapping.
    """
    depth = {}
    reach = {}
    for i in range(net.n_leaves):
        ref = f"I{i}"
        depth[ref] = 0
        reach[ref] = frozenset()
    for g in net.gates:
        d = max(depth[r] for r in g.inputs)
        depth[g.ref] = d + (1 if g.kind == "OR2" else 0)
        r = frozenset().union(*(reach[x] for x in g.inputs))
        reach[g.ref] = r | {g.gid} if g.kind == "OR2" else r
    kinds = [g.kind for g in net.gates]
    return NetlistStats(
        n_leaves=net.n_leaves,
        n_bits=net.n_bits,
        or_count=kinds.count("OR2"),
        and_count=kinds.count("AND2"),
        not_count=kinds.count("NOT"),
        nand_count=kinds.count("NAND2"),
        or_per_output=tuple(len(reach[ref]) for ref in net.outputs),
        or_depth_per_output=tuple(depth[ref] for ref in net.outputs),
        fused_one_hot=any(k in ("AND2", "NOT") for k in kinds),
    )
