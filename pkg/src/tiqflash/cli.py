"""Command-line front end.

Six subcommands cover the design flow: ``size`` turns a converter spec
into a design JSON, ``encode`` emits the encoder gate netlist,
``simulate`` runs a stimulus through a sized design and writes a trace
CSV, ``analyze`` computes linearity and temperature drift reports,
``netlist`` emits a SPICE deck, and ``plot`` renders a trace or report
to SVG.  Exit codes: 0 success, 1 rejected input, 2 computation failed.
Diagnostics go to stderr prefixed ``error:``.

A ``--config file.json`` may supply any long-option value (flat JSON
object keyed by option name, same syntax as the flag); explicit flags
win over the config, the config wins over built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
from types import SimpleNamespace

from . import codes, devices, metrics, netlist_io, plots, simulator, synthesis
from .errors import ComputationError, ParseError, TiqFlashError, ValidationError

__all__ = ["main", "main_entry"]


class _Parser(argparse.ArgumentParser):
    """argparse that reports errors our way: one 'error:' line, exit 1."""

    def error(self, message):
        self.exit(1, f"error: {message}\n")


def _build_parser() -> _Parser:
    p = _Parser(prog="tiqflash", description="TIQ flash ADC design and simulation")
    sub = p.add_subparsers(dest="command", metavar="<command>")

    def common(sp):
        sp.add_argument("--config", help="JSON file supplying default option values")

    sp = sub.add_parser("size", help="size a comparator bank and write a design JSON")
    common(sp)
    sp.add_argument("-n", "--bits", type=int, help="resolution in bits")
    sp.add_argument("--vdd", type=float, help="supply voltage, V (default 2.5)")
    sp.add_argument("--gain", type=float, help="comparator gain magnitude |A_v|")
    sp.add_argument("--center", type=float, help="ladder centre, V (default: balanced threshold)")
    sp.add_argument("--preset", help="device preset name (default generic-0.25u)")
    sp.add_argument("--grid", help="width grid as wmin,wmax,step in um (default 0.5,20,0.05)")
    sp.add_argument("--length", type=float, help="channel length, um (default 0.25)")
    sp.add_argument("-o", "--output", required=True, help="design JSON to write")

    sp = sub.add_parser("encode", help="build the fat-tree encoder netlist")
    common(sp)
    sp.add_argument("-n", "--bits", type=int, help="resolution in bits")
    sp.add_argument("--gate-style", choices=["or2", "nand"], dest="gate_style",
                    help="logic family for the written netlist (default or2)")
    sp.add_argument("--fuse-one-hot", action="store_true", dest="fuse_one_hot",
                    help="include the one-hot AND/NOT stage in the netlist")
    sp.add_argument("--stats", action="store_true",
                    help="print gate counts and depths (canonical OR tree)")
    sp.add_argument("-o", "--output", help="netlist file to write")

    sp = sub.add_parser("simulate", help="run a stimulus through a sized design")
    common(sp)
    sp.add_argument("-d", "--design", required=True, help="design JSON from 'size'")
    sp.add_argument("--sine", help="sine stimulus as freq_hz,amplitude,offset")
    sp.add_argument("--ramp", nargs="?", const="full",
                    help="ramp stimulus as v_start,v_end (default: 0 to vdd)")
    sp.add_argument("--rate", type=float, help="sample rate, Hz (default 1e6)")
    sp.add_argument("--duration", type=float, help="duration, s (default 1e-2)")
    sp.add_argument("--mode", choices=["ideal", "analog"], help="comparator model (default ideal)")
    sp.add_argument("--preset", help="device preset for analog mode (default generic-0.25u)")
    sp.add_argument("-o", "--output", required=True, help="trace CSV to write")

    sp = sub.add_parser("analyze", help="linearity and drift reports for a design")
    common(sp)
    sp.add_argument("-d", "--design", required=True, help="design JSON from 'size'")
    sp.add_argument("--dnl", action="store_true", help="compute endpoint DNL/INL")
    sp.add_argument("--drift", help="comma-separated temperatures in degC")
    sp.add_argument("--preset", help="device preset for drift (default generic-0.25u)")
    sp.add_argument("-o", "--output", help="report JSON to write (default: stdout)")
    sp.add_argument("--csv", help="write exactly one table (requires a single analysis)")
    sp.add_argument("--plots", help="directory for SVG figures of the requested analyses")

    sp = sub.add_parser("netlist", help="emit a SPICE deck for a sized design")
    common(sp)
    sp.add_argument("-d", "--design", required=True, help="design JSON from 'size'")
    sp.add_argument("--boosters", action="store_true", help="include the gain-booster stages")
    sp.add_argument("--model-card", choices=["generic"], dest="model_card",
                    help="emit .MODEL cards mirroring the generic-0.25u preset")
    sp.add_argument("--model-n", dest="model_n", help="NMOS model name (default NMOS)")
    sp.add_argument("--model-p", dest="model_p", help="PMOS model name (default PMOS)")
    sp.add_argument("-o", "--output", required=True, help="deck file to write")

    sp = sub.add_parser("plot", help="render a trace or report to SVG")
    common(sp)
    sp.add_argument("-i", "--input", required=True, help="trace CSV or report JSON")
    sp.add_argument("--kind", required=True, choices=["staircase", "dnl", "drift"])
    sp.add_argument("-o", "--output", required=True, help="SVG file to write")

    return p


def _load_config(path):
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON ({exc})", path="$") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: config must be a JSON object", path="$")
    for k, v in doc.items():
        if not isinstance(v, (str, int, float, bool)):
            raise ParseError(f"{path}: config value for {k!r} must be a scalar", path=f"$.{k}")
    return doc


def _merged(args, config, key, default=None):
    v = getattr(args, key, None)
    if v is not None:
        return v
    if key in config:
        return config[key]
    return default


def _require(value, what):
    if value is None:
        raise ValidationError(f"{what} is required")
    return value


def _floats(text, what, count=None):
    try:
        vals = [float(x) for x in str(text).split(",")]
    except ValueError as exc:
        raise ValidationError(f"bad {what}: {text!r} ({exc})") from exc
    if count is not None and len(vals) != count:
        raise ValidationError(f"bad {what}: expected {count} comma-separated numbers, got {len(vals)}")
    return vals


def _cmd_size(args, config):
    n = int(_require(_merged(args, config, "bits"), "--bits"))
    vdd = float(_merged(args, config, "vdd", 2.5))
    gain = _require(_merged(args, config, "gain"), "--gain")
    preset = str(_merged(args, config, "preset", "generic-0.25u"))
    params = devices.load_preset(preset)
    center = _merged(args, config, "center")
    if center is None:
        center = devices.balanced_threshold(vdd, params)
    spec = synthesis.LadderSpec(n_bits=n, vdd=vdd, av_mag=float(gain), v_center=float(center))
    ladder = synthesis.compute_ladder(spec, params)
    wmin, wmax, step = _floats(_merged(args, config, "grid", "0.5,20,0.05"), "--grid", 3)
    length = float(_merged(args, config, "length", 0.25))
    grid = synthesis.WidthGrid(w_min=wmin, w_max=wmax, w_step=step, l_fixed=length)
    cands = synthesis.enumerate_candidates(grid, params, vdd)
    bank = synthesis.size_comparators(ladder, cands)
    netlist_io.save_design(bank, args.output)
    rep = synthesis.bank_report(bank)
    print(
        f"wrote {args.output}: {rep.n_designs} comparators, "
        f"v_ref [{rep.v_ref_min:.9g}, {rep.v_ref_max:.9g}] V, "
        f"max |error| {rep.max_abs_error:.3g} V ({rep.max_abs_error_lsb:.3g} LSB)"
    )
    return 0


def _cmd_encode(args, config):
    n = int(_require(_merged(args, config, "bits"), "--bits"))
    gate_style = str(_merged(args, config, "gate_style", "or2"))
    if not args.output and not args.stats:
        raise ValidationError("nothing to do: pass -o and/or --stats")
    net = codes.build_fat_tree(n, fuse_one_hot=bool(args.fuse_one_hot))
    if args.output:
        netlist_io.write_gate_netlist(net, args.output, gate_style=gate_style)
        print(f"wrote {args.output}")
    if args.stats:
        st = codes.netlist_stats(net)
        print(f"leaves {st.n_leaves}")
        print(f"outputs {st.n_bits}")
        print(f"or_total {st.or_count}")
        print(f"and_total {st.and_count}")
        print(f"not_total {st.not_count}")
        print("or_per_output " + " ".join(str(c) for c in st.or_per_output))
        print("or_depth_per_output " + " ".join(str(d) for d in st.or_depth_per_output))
        print(f"fused_one_hot {'true' if st.fused_one_hot else 'false'}")
        print(f"latency_bound_levels {metrics.encoder_latency_bound(n)}")
    return 0


def _make_stimulus(args, config, bank):
    rate = float(_merged(args, config, "rate", 1e6))
    duration = float(_merged(args, config, "duration", 1e-2))
    sine = _merged(args, config, "sine")
    ramp = _merged(args, config, "ramp")
    if sine is not None and ramp is not None:
        raise ValidationError("--sine and --ramp are mutually exclusive")
    if sine is not None:
        f, amp, off = _floats(sine, "--sine", 3)
        return simulator.SineStimulus(freq_hz=f, amplitude=amp, offset=off,
                                      sample_rate=rate, duration=duration)
    if ramp is None or ramp == "full":
        return simulator.RampStimulus(v_start=0.0, v_end=bank.vdd,
                                      sample_rate=rate, duration=duration)
    v0, v1 = _floats(ramp, "--ramp", 2)
    return simulator.RampStimulus(v_start=v0, v_end=v1, sample_rate=rate, duration=duration)


def _cmd_simulate(args, config):
    bank = netlist_io.load_design(args.design)
    net = codes.build_fat_tree(bank.n_bits)
    stim = _make_stimulus(args, config, bank)
    mode_name = str(_merged(args, config, "mode", "ideal"))
    if mode_name == "analog":
        preset = str(_merged(args, config, "preset", "generic-0.25u"))
        params = devices.load_preset(preset)
        mode = simulator.analog_mode(params, bank.vdd, l=bank.designs[0].l)
    else:
        mode = simulator.IDEAL
    trace = simulator.simulate(bank, net, stim, mode)
    netlist_io.write_trace_csv(trace, args.output)
    print(f"wrote {args.output}: {len(trace.records)} samples")
    return 0


def _cmd_analyze(args, config):
    bank = netlist_io.load_design(args.design)
    drift_arg = _merged(args, config, "drift")
    if not args.dnl and drift_arg is None:
        raise ValidationError("nothing to analyze: pass --dnl and/or --drift")
    if args.csv and args.dnl and drift_arg is not None:
        raise ValidationError("--csv writes exactly one table; pass --dnl or --drift, not both")
    report = {"n_bits": bank.n_bits, "vdd": bank.vdd}
    lo, hi = metrics.full_scale(bank)
    report["full_scale"] = {"v_low": lo, "v_high": hi, "span": hi - lo}
    lin = drift = None
    if args.dnl:
        lin = metrics.linearity(bank)
        report["linearity"] = {
            "v_lsb": lin.v_lsb_used,
            "max_abs_dnl": lin.max_abs_dnl,
            "max_abs_inl": lin.max_abs_inl,
            "dnl_lsb": list(lin.dnl),
            "inl_lsb": list(lin.inl),
        }
    if drift_arg is not None:
        temps = _floats(drift_arg, "--drift")
        preset = str(_merged(args, config, "preset", "generic-0.25u"))
        params = devices.load_preset(preset)
        drift = metrics.temperature_drift(bank, params, temps)
        report["drift"] = {
            "t_ref_c": drift.t_ref_c,
            "entries": [
                {"t_c": e.t_c, "v_low": e.v_low, "v_high": e.v_high,
                 "max_ref_shift": e.max_ref_shift}
                for e in drift.entries
            ],
        }
    text = json.dumps(report, indent=2) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.output}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(netlist_io.linearity_csv(lin) if lin is not None else netlist_io.drift_csv(drift))
        print(f"wrote {args.csv}")
    if args.plots:
        import os

        os.makedirs(args.plots, exist_ok=True)
        if lin is not None:
            path = os.path.join(args.plots, "dnl.svg")
            plots.save_svg(plots.dnl_figure(lin), path)
            print(f"wrote {path}")
        if drift is not None:
            path = os.path.join(args.plots, "drift.svg")
            plots.save_svg(plots.drift_figure(drift), path)
            print(f"wrote {path}")
    if not args.output and not args.csv and not args.plots:
        sys.stdout.write(text)
    return 0


def _cmd_netlist(args, config):
    bank = netlist_io.load_design(args.design)
    opts = netlist_io.SpiceEmitOptions(
        model_name_n=str(_merged(args, config, "model_n", "NMOS")),
        model_name_p=str(_merged(args, config, "model_p", "PMOS")),
        include_boosters=bool(args.boosters),
    )
    params = None
    if _merged(args, config, "model_card") == "generic":
        params = devices.load_preset("generic-0.25u")
    text = netlist_io.emit_spice(bank, opts, params=params)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(text)
    m_lines = sum(1 for line in text.splitlines() if line.startswith("M"))
    print(f"wrote {args.output}: {len(bank.designs)} subcircuits, {m_lines} transistors")
    return 0


def _cmd_plot(args, config):
    kind = args.kind
    if kind == "staircase":
        t, v, c = netlist_io.read_trace_csv(args.input)
        fig = plots.staircase_figure(v, c)
    else:
        with open(args.input, "r", encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{args.input}: not valid JSON ({exc})", path="$") from exc
        if kind == "dnl":
            if "linearity" not in doc:
                raise ValidationError("report has no linearity section; run analyze --dnl")
            lin = doc["linearity"]
            fig = plots.dnl_figure(SimpleNamespace(dnl=lin["dnl_lsb"]))
        else:
            if "drift" not in doc:
                raise ValidationError("report has no drift section; run analyze --drift")
            dr = doc["drift"]
            fig = plots.drift_figure(SimpleNamespace(
                t_ref_c=dr["t_ref_c"],
                entries=[SimpleNamespace(**e) for e in dr["entries"]],
            ))
    plots.save_svg(fig, args.output)
    print(f"wrote {args.output}")
    return 0


_COMMANDS = {
    "size": _cmd_size,
    "encode": _cmd_encode,
    "simulate": _cmd_simulate,
    "analyze": _cmd_analyze,
    "netlist": _cmd_netlist,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        print("error: a command is required (see --help)", file=sys.stderr)
        return 1
    try:
        config = _load_config(args.config)
        return _COMMANDS[args.command](args, config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ComputationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TiqFlashError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyError as exc:
        print(f"error: malformed report file: missing {exc}", file=sys.stderr)
        return 1


def main_entry() -> None:
    sys.exit(main(sys.argv[1:]))
