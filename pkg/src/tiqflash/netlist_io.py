"""File formats: SPICE decks, gate netlists, design JSON, trace CSV.

Every writer here is deterministic: the same objects produce the same
bytes, with no timestamps or environment leakage, so emitted files can
be diffed and kept under version control.  Floats in design JSON are
printed with 17 significant digits and parse back bit-exact; SPICE
widths round to 4 decimals (they come off a coarse grid anyway); trace
CSV uses 9 significant digits.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

import numpy as np

from .codes import Gate, GateNetlist
from .errors import ArityError, ParameterError, ParseError
from .synthesis import ComparatorBank, ComparatorDesign, ReferenceLadder

__all__ = [
    "SpiceEmitOptions",
    "emit_spice",
    "model_card_text",
    "nand_mapped",
    "gate_netlist_text",
    "write_gate_netlist",
    "parse_gate_netlist",
    "design_to_json",
    "design_from_json",
    "save_design",
    "load_design",
    "trace_csv_text",
    "write_trace_csv",
    "read_trace_csv",
    "linearity_csv",
    "drift_csv",
]

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class SpiceEmitOptions:
    """Knobs for structural emission.

    ``gate_style`` selects the logic family for encoder netlists
    ('or2' keeps the canonical OR tree, 'nand' maps it); the
    transistor-level deck does not use it.
    """

    model_name_n: str = "NMOS"
    model_name_p: str = "PMOS"
    include_boosters: bool = False
    booster_w: float = 0.5  # um, both booster devices
    gate_style: str = "or2"

    def __post_init__(self):
        for name in (self.model_name_n, self.model_name_p):
            if not _IDENT.match(name):
                raise ParameterError(f"model name {name!r} is not a valid identifier")
        if self.booster_w <= 0.0:
            raise ParameterError(f"booster_w must be positive, got {self.booster_w!r}")
        if self.gate_style not in ("or2", "nand"):
            raise ParameterError(f"gate_style must be 'or2' or 'nand', got {self.gate_style!r}")


def _mline(k, drain, gate, rail, model, w, l):
    return f"M{k} {drain} {gate} {rail} {rail} {model} W={w:.4f}u L={l:.4f}u"


def _inverter_lines(k0, node_in, node_out, wp, wn, l, opts):
    """Two M-lines for one inverter; returns (lines, next index)."""
    return [
        _mline(k0, node_out, node_in, "VDD", opts.model_name_p, wp, l),
        _mline(k0 + 1, node_out, node_in, "VSS", opts.model_name_n, wn, l),
    ], k0 + 2


def emit_spice(bank: ComparatorBank, opts: SpiceEmitOptions = SpiceEmitOptions(), params=None) -> str:
    """Structural deck for the whole comparator bank.

    One subcircuit per comparator, ``TIQ_COMP_<i> IN OUT VDD VSS``, two
    identical threshold/polarity inverters through node ``N<i>_MID``
    (plus two balanced boosters through ``N<i>_CMP``/``N<i>_BST`` when
    requested), then one instance per threshold sharing the input net.
    Passing ``params`` prepends a matching pair of level-1 model cards.
    """
    lines = [
        f"* TIQ comparator bank: {bank.n_bits}-bit flash, vdd={bank.vdd:g} V",
        f"* {len(bank.designs)} comparators, widths in um",
    ]
    if params is not None:
        lines.append(model_card_text(params, opts).rstrip("\n"))
    for i, d in enumerate(bank.designs):
        lines.append("")
        lines.append(f".SUBCKT TIQ_COMP_{i} IN OUT VDD VSS")
        mid = f"N{i}_MID"
        if opts.include_boosters:
            cmp_out, bst = f"N{i}_CMP", f"N{i}_BST"
            stages = [
                ("IN", mid, d.wp, d.wn),
                (mid, cmp_out, d.wp, d.wn),
                (cmp_out, bst, opts.booster_w, opts.booster_w),
                (bst, "OUT", opts.booster_w, opts.booster_w),
            ]
        else:
            stages = [("IN", mid, d.wp, d.wn), (mid, "OUT", d.wp, d.wn)]
        k = 1
        for node_in, node_out, wp, wn in stages:
            ls, k = _inverter_lines(k, node_in, node_out, wp, wn, d.l, opts)
            lines.extend(ls)
        lines.append(f".ENDS TIQ_COMP_{i}")
    lines.append("")
    lines.append("* bank instances, thermometer outputs T<i>")
    for i in range(len(bank.designs)):
        lines.append(f"X{i} VIN T{i} VDD VSS TIQ_COMP_{i}")
    lines.append(".END")
    return "\n".join(lines) + "\n"


def model_card_text(params, opts: SpiceEmitOptions = SpiceEmitOptions()) -> str:
    """Level-1 .MODEL pair mirroring a device parameter set."""
    kp_n = params.kprime_n * 1e-6  # uA/V^2 -> A/V^2
    kp_p = params.kprime_p * 1e-6
    return (
        f".MODEL {opts.model_name_n} NMOS (LEVEL=1 VTO={params.vtn:.4f} "
        f"KP={kp_n:.4e} LAMBDA={params.lambda_n:.4f})\n"
        f".MODEL {opts.model_name_p} PMOS (LEVEL=1 VTO={-params.vtp_mag:.4f} "
        f"KP={kp_p:.4e} LAMBDA={params.lambda_p:.4f})\n"
    )


# ---------------------------------------------------------------------------
# Gate-level netlists

def nand_mapped(net: GateNetlist) -> GateNetlist:
    """Rewrite OR2/AND2 gates into NAND2+NOT; logically equivalent."""
    gates = []
    ref_map = {f"I{i}": f"I{i}" for i in range(net.n_leaves)}
    gid = 0

    def emit(kind, inputs):
        nonlocal gid
        g = Gate(gid, kind, inputs)
        gates.append(g)
        gid += 1
        return g.ref

    for g in net.gates:
        ins = tuple(ref_map[r] for r in g.inputs)
        if g.kind == "OR2":
            n1 = emit("NOT", (ins[0],))
            n2 = emit("NOT", (ins[1],))
            ref_map[g.ref] = emit("NAND2", (n1, n2))
        elif g.kind == "AND2":
            nd = emit("NAND2", ins)
            ref_map[g.ref] = emit("NOT", (nd,))
        else:  # NOT and NAND2 pass through
            ref_map[g.ref] = emit(g.kind, ins)
    return GateNetlist(
        n_leaves=net.n_leaves,
        gates=tuple(gates),
        outputs=tuple(ref_map[r] for r in net.outputs),
    )


def gate_netlist_text(net: GateNetlist, gate_style: str = "or2") -> str:
    """Plain-text netlist: leaves first, then gates, then outputs.

    Lines are ``I<index>``, ``G<id> <KIND> <in1> [<in2>]`` and
    ``O<bit> <ref>`` with output bits listed most significant first.
    """
    if gate_style == "nand":
        net = nand_mapped(net)
    elif gate_style != "or2":
        raise ParameterError(f"gate_style must be 'or2' or 'nand', got {gate_style!r}")
    lines = [f"I{i}" for i in range(net.n_leaves)]
    for g in net.gates:
        lines.append(f"G{g.gid} {g.kind} " + " ".join(g.inputs))
    for bit in range(net.n_bits - 1, -1, -1):
        lines.append(f"O{bit} {net.outputs[bit]}")
    return "\n".join(lines) + "\n"


def write_gate_netlist(net: GateNetlist, path, gate_style: str = "or2") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(gate_netlist_text(net, gate_style))


def parse_gate_netlist(text: str) -> GateNetlist:
    """Parse the text format back; strict about order and references."""
    leaves = 0
    gates = []
    outputs = {}
    section = "leaves"
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            raise ParseError("blank line in gate netlist", path=f"line {lineno}")
        tok = line.split()
        if tok[0].startswith("I") and len(tok) == 1:
            if section != "leaves":
                raise ParseError("leaf after gates began", path=f"line {lineno}")
            if tok[0] != f"I{leaves}":
                raise ParseError(f"expected I{leaves}, got {tok[0]!r}", path=f"line {lineno}")
            leaves += 1
        elif tok[0].startswith("G"):
            if section == "outputs":
                raise ParseError("gate after outputs began", path=f"line {lineno}")
            section = "gates"
            try:
                gid = int(tok[0][1:])
                gates.append(Gate(gid, tok[1], tuple(tok[2:])))
            except (ValueError, IndexError, ParameterError, ArityError) as exc:
                raise ParseError(f"bad gate line: {exc}", path=f"line {lineno}") from exc
        elif tok[0].startswith("O") and len(tok) == 2:
            section = "outputs"
            try:
                outputs[int(tok[0][1:])] = tok[1]
            except ValueError as exc:
                raise ParseError(f"bad output line: {exc}", path=f"line {lineno}") from exc
        else:
            raise ParseError(f"unrecognised line {line!r}", path=f"line {lineno}")
    if not outputs or sorted(outputs) != list(range(len(outputs))):
        raise ParseError(f"output bits {sorted(outputs)} are not contiguous from 0")
    try:
        return GateNetlist(
            n_leaves=leaves,
            gates=tuple(gates),
            outputs=tuple(outputs[b] for b in range(len(outputs))),
        )
    except (ParameterError, ArityError) as exc:
        raise ParseError(f"inconsistent gate netlist: {exc}") from exc


# ---------------------------------------------------------------------------
# Design JSON

def _fnum(x: float) -> str:
    # 17 significant digits: parses back to the identical double.
    return f"{x:.16e}"


def design_to_json(bank: ComparatorBank) -> str:
    """Serialise a bank; the text is deterministic and round-trips bit-exact."""
    rows = []
    for i, d in enumerate(bank.designs):
        sep = "," if i < len(bank.designs) - 1 else ""
        rows.append(
            f'    {{"wp": {_fnum(d.wp)}, "wn": {_fnum(d.wn)}, "l": {_fnum(d.l)}, '
            f'"v_ref_achieved": {_fnum(d.v_ref_achieved)}, '
            f'"v_ref_ideal": {_fnum(d.v_ref_ideal)}}}{sep}'
        )
    lad = bank.ladder
    lines = [
        "{",
        f'  "n_bits": {bank.n_bits},',
        f'  "vdd": {_fnum(bank.vdd)},',
        '  "ladder": {',
        f'    "v_low": {_fnum(lad.v_low)},',
        f'    "v_high": {_fnum(lad.v_high)},',
        f'    "v_lsb": {_fnum(lad.v_lsb)}',
        "  },",
        '  "designs": [',
        *rows,
        "  ]",
        "}",
    ]
    return "\n".join(lines) + "\n"


def _need(doc, keys, path):
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object", path=path)
    unknown = sorted(set(doc) - set(keys))
    if unknown:
        raise ParseError(f"unknown key {unknown[0]!r}", path=f"{path}.{unknown[0]}")
    missing = [k for k in keys if k not in doc]
    if missing:
        raise ParseError(f"missing key {missing[0]!r}", path=f"{path}.{missing[0]}")


def _num(doc, key, path):
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"expected a number, got {v!r}", path=f"{path}.{key}")
    return float(v)


def design_from_json(text: str) -> ComparatorBank:
    """Parse and validate a design file; inconsistent content is rejected."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON ({exc})", path="$") from exc
    _need(doc, ("n_bits", "vdd", "ladder", "designs"), "$")
    n_bits = doc["n_bits"]
    if isinstance(n_bits, bool) or not isinstance(n_bits, int):
        raise ParseError(f"expected an integer, got {n_bits!r}", path="$.n_bits")
    vdd = _num(doc, "vdd", "$")
    _need(doc["ladder"], ("v_low", "v_high", "v_lsb"), "$.ladder")
    v_low = _num(doc["ladder"], "v_low", "$.ladder")
    v_high = _num(doc["ladder"], "v_high", "$.ladder")
    v_lsb = _num(doc["ladder"], "v_lsb", "$.ladder")
    if not isinstance(doc["designs"], list):
        raise ParseError("expected an array", path="$.designs")
    m = 2**n_bits - 1 if n_bits >= 1 else 0
    if len(doc["designs"]) != m:
        raise ParseError(
            f"{n_bits}-bit bank needs {m} designs, file has {len(doc['designs'])}",
            path="$.designs",
        )
    designs = []
    for i, row in enumerate(doc["designs"]):
        path = f"$.designs[{i}]"
        _need(row, ("wp", "wn", "l", "v_ref_achieved", "v_ref_ideal"), path)
        designs.append(
            ComparatorDesign(
                wp=_num(row, "wp", path),
                wn=_num(row, "wn", path),
                l=_num(row, "l", path),
                v_ref_achieved=_num(row, "v_ref_achieved", path),
                v_ref_ideal=_num(row, "v_ref_ideal", path),
            )
        )
    refs = tuple(d.v_ref_ideal for d in designs)
    span = v_high - v_low
    if span <= 0.0:
        raise ParseError("v_high must exceed v_low", path="$.ladder.v_high")
    tol = 1e-9 * max(abs(span), 1.0)
    if abs(refs[0] - v_low) > tol:
        raise ParseError(
            f"first ideal rung {refs[0]!r} does not match ladder v_low {v_low!r}",
            path="$.designs[0].v_ref_ideal",
        )
    if abs(refs[-1] - v_high) > tol:
        raise ParseError(
            f"last ideal rung {refs[-1]!r} does not match ladder v_high {v_high!r}",
            path=f"$.designs[{m - 1}].v_ref_ideal",
        )
    if abs(v_lsb - span / (m - 1)) > tol:
        raise ParseError(
            f"v_lsb {v_lsb!r} inconsistent with span/{m - 1}",
            path="$.ladder.v_lsb",
        )
    expected = np.linspace(v_low, v_high, m)
    worst = int(np.argmax(np.abs(np.array(refs) - expected)))
    if abs(refs[worst] - expected[worst]) > tol:
        raise ParseError(
            f"ideal rungs are not uniformly spaced (rung {worst})",
            path=f"$.designs[{worst}].v_ref_ideal",
        )
    ladder = ReferenceLadder(v_low=v_low, v_high=v_high, v_lsb=v_lsb, ideal_refs=refs)
    return ComparatorBank(n_bits=n_bits, vdd=vdd, ladder=ladder, designs=tuple(designs))


def save_design(bank: ComparatorBank, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(design_to_json(bank))


def load_design(path) -> ComparatorBank:
    with open(path, "r", encoding="utf-8") as fh:
        return design_from_json(fh.read())


# ---------------------------------------------------------------------------
# Trace and report tables

TRACE_HEADER = "t_s,v_in_V,code"


def trace_csv_text(trace) -> str:
    lines = [TRACE_HEADER]
    for r in trace.records:
        lines.append(f"{r.t:.9g},{r.v_in:.9g},{r.code.value}")
    return "\n".join(lines) + "\n"


def write_trace_csv(trace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(trace_csv_text(trace))


def read_trace_csv(path):
    """Read a trace table back as (t, v_in, code) arrays."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        raise ParseError(f"expected header {TRACE_HEADER!r}", path="line 1")
    t, v, c = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(f"expected 3 fields, got {len(parts)}", path=f"line {lineno}")
        try:
            t.append(float(parts[0]))
            v.append(float(parts[1]))
            c.append(int(parts[2]))
        except ValueError as exc:
            raise ParseError(f"bad value ({exc})", path=f"line {lineno}") from exc
    return np.array(t), np.array(v), np.array(c, dtype=np.int64)


def linearity_csv(report) -> str:
    """One row per rung gap: DNL of the gap, INL at the rung above it."""
    lines = ["gap,dnl_lsb,inl_lsb"]
    for i, d in enumerate(report.dnl):
        lines.append(f"{i},{d:.9g},{report.inl[i + 1]:.9g}")
    return "\n".join(lines) + "\n"


def drift_csv(report) -> str:
    lines = ["t_c,v_low_V,v_high_V,max_ref_shift_V"]
    for e in report.entries:
        lines.append(f"{e.t_c:.9g},{e.v_low:.9g},{e.v_high:.9g},{e.max_ref_shift:.9g}")
    return "\n".join(lines) + "\n"
