"""Command-line interface.

Exit codes: 0 clean result, 1 usage or input error, 2 a design constraint is violated.
"""

import argparse
import contextlib
import csv
import sys
from dataclasses import replace

from .abacus import fan_in, sweep, write_sweep_csv
from .attenuator import check_saturation, continuity_band, max_sdf, sweep_curve, tuned_for_sdf
from .column_sim import IdealAttenuator, SpikeSchedule, read_schedule_csv, simulate_column
from .config import default_config_text, load_config, parse_capacitance
from .devices import EnvmDeviceModel
from .errors import XbarError
from .units import format_quantity, parse_quantity, parse_quantity_list, sci

EXIT_OK, EXIT_INPUT, EXIT_CONSTRAINT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _quantity(text):
    try:
        return parse_quantity(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _capacitance(text):
    try:
        return parse_capacitance(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_globals(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", metavar="PATH", default=default(None),
                        help="configuration file (built-in defaults when omitted)")
    parser.add_argument("--csv", action="store_true", default=default(False),
                        help="emit CSV instead of aligned text")
    parser.add_argument("--output", metavar="PATH", default=default(None),
                        help="write the primary output to PATH instead of stdout")


def _add_overrides(parser):
    parser.add_argument("--sdf", type=_quantity, help="scaling-down factor (default: device default)")
    parser.add_argument("--r-lrs", type=_quantity, help="override device LRS resistance")
    parser.add_argument("--r-hrs", type=_quantity, help="override device HRS resistance")
    parser.add_argument("--c-mem", type=_capacitance, help="membrane capacitance or preset name")
    parser.add_argument("--v-th", type=_quantity, help="firing threshold")
    parser.add_argument("--i-leak", type=_quantity, help="constant neuron leak current")
    parser.add_argument("--pulse-width", type=_quantity, help="read pulse width")
    parser.add_argument("--read-voltage", type=_quantity, help="read pulse amplitude")


def build_parser():
    common = _Parser(add_help=False)
    _add_globals(common, suppress=True)

    parser = _Parser(prog="xbar-fanin", description="eNVM crossbar fan-in co-design toolkit")
    _add_globals(parser, suppress=False)
    parser.add_argument("--print-default-config", action="store_true",
                        help="print the default configuration and exit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("fanin", parents=[common], help="fan-in of one device/neuron point")
    p.add_argument("--device", required=True)
    _add_overrides(p)

    p = sub.add_parser("sweep", parents=[common], help="fan-in table over devices x capacitances")
    p.add_argument("--devices", help="comma-separated device labels")
    p.add_argument("--c-mem", help="comma-separated capacitances or preset names")
    p.add_argument("--sdf", help="comma-separated SDFs aligned with --devices (one value applies to all)")
    p.add_argument("--i-leak", type=_quantity)
    p.add_argument("--resistance-samples", type=int, help="extra rows per device spanning [r_lrs, r_hrs]")

    p = sub.add_parser("attenuate", parents=[common], help="attenuator transfer curve")
    p.add_argument("--imin", type=_quantity, required=True)
    p.add_argument("--imax", type=_quantity, required=True)
    p.add_argument("--points", type=int, default=64)
    p.add_argument("--bias-divider", help="comma-separated bias divider values, one curve each")

    p = sub.add_parser("simulate", parents=[common], help="time-stepped column simulation")
    p.add_argument("--device")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--count", type=int, help="number of identical LRS read events")
    src.add_argument("--schedule", metavar="CSV", help="schedule file (t_start_s,width_s,amplitude_v,resistance_ohms)")
    p.add_argument("--period", type=_quantity, help="event period for --count (default: pulse period)")
    p.add_argument("--dt", type=_quantity, help="integration step (default: pulse width / 100)")
    p.add_argument("--tanh", action="store_true", help="use the tanh attenuator tuned to the SDF")
    p.add_argument("--spikes", metavar="PATH", help="also write the spike list CSV to PATH")
    _add_overrides(p)

    p = sub.add_parser("check", parents=[common], help="per-device constraint report")
    p.add_argument("--sdf", type=_quantity, help="apply this SDF to every device")
    p.add_argument("--i-leak", type=_quantity)

    sub.add_parser("print-default-config", parents=[common], help="print the default configuration")
    return parser


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _resolve_point(cfg, args):
    """(neuron, device, sdf, pulse) for a single-point command with overrides applied."""
    device = cfg.device(args.device)
    if args.r_lrs is not None or args.r_hrs is not None:
        r_lrs = args.r_lrs if args.r_lrs is not None else device.r_lrs
        r_hrs = args.r_hrs if args.r_hrs is not None else device.r_hrs
        if r_lrs is None:
            raise XbarError(f"device {device.label!r} needs --r-lrs")
        if r_hrs is None or r_hrs < r_lrs:
            r_hrs = r_lrs if r_hrs is None else r_hrs
        device = replace(device, r_lrs=r_lrs, r_hrs=r_hrs)
    neuron = cfg.neuron
    changes = {k: v for k, v in (("c_mem", args.c_mem), ("v_th", args.v_th), ("i_leak", args.i_leak))
               if v is not None}
    if changes:
        neuron = replace(neuron, **changes)
    pulse = cfg.pulse
    if args.pulse_width is not None:
        period = max(pulse.period, args.pulse_width) if pulse.period != pulse.width else args.pulse_width
        pulse = replace(pulse, width=args.pulse_width, period=period)
    if args.read_voltage is not None:
        pulse = replace(pulse, amplitude=args.read_voltage)
        device = replace(device, read_voltage=args.read_voltage)
    sdf = args.sdf if args.sdf is not None else device.default_sdf
    return neuron, device, sdf, pulse


def _fmt_flags(rep):
    return ";".join(sorted(f.value for f in rep.binding_constraints)) or "none"


def _assumption_notes(neuron):
    notes = []
    if neuron.i_leak == 0:
        notes.append("note: i_leak = 0 assumed (neuron leak current unspecified)")
    if neuron.t_refractory == 0:
        notes.append("note: t_refractory = 0 assumed")
    return notes


def cmd_fanin(cfg, args, out):
    neuron, device, sdf, pulse = _resolve_point(cfg, args)
    atten = tuned_for_sdf(cfg.attenuator, sdf)
    rep = fan_in(neuron, device, sdf, pulse, attenuator=atten, rel_tolerance=cfg.rel_tolerance)
    if args.csv:
        write_sweep_csv([rep], out)
    else:
        items = [
            ("device", rep.device),
            ("c_mem", format_quantity(rep.c_mem, "F")),
            ("v_th", format_quantity(rep.v_th, "V")),
            ("i_leak", format_quantity(rep.i_leak, "A")),
            ("r_lrs", format_quantity(rep.r_lrs, "ohm")),
            ("pulse", f"{format_quantity(pulse.width, 's')} / {format_quantity(pulse.amplitude, 'V')}"),
            ("sdf", f"{rep.sdf:g}"),
            ("max_sdf", f"{rep.max_sdf:g}"),
            ("i_input", format_quantity(rep.i_input_attenuated, "A")),
            ("delta_v_mem", format_quantity(rep.delta_v_mem, "V")),
            ("fan_in", "undefined" if rep.fan_in is None else str(rep.fan_in)),
            ("scale", "-" if rep.scale is None else rep.scale.value),
            ("flags", _fmt_flags(rep)),
        ]
        width = max(len(k) for k, _ in items)
        for key, value in items:
            print(f"{key:<{width}}  {value}", file=out)
        for note in _assumption_notes(neuron):
            print(note, file=out)
    return EXIT_OK if rep.clean else EXIT_CONSTRAINT


def cmd_sweep(cfg, args, out):
    labels = cfg.sweep_devices if args.devices is None else [s.strip() for s in args.devices.split(",") if s.strip()]
    if args.c_mem is None:
        caps = cfg.sweep_c_mem
    else:
        caps = [parse_capacitance(s) for s in args.c_mem.split(",") if s.strip()]
    if not labels or not caps:
        raise XbarError("empty sweep grid")
    devices = [cfg.device(label) for label in labels]
    sdfs = None
    if args.sdf is not None:
        values = parse_quantity_list(args.sdf)
        if len(values) == 1:
            values = values * len(devices)
        if len(values) != len(devices):
            raise XbarError(f"--sdf has {len(values)} values for {len(devices)} devices")
        sdfs = values
    neuron = cfg.neuron if args.i_leak is None else replace(cfg.neuron, i_leak=args.i_leak)
    neurons = [replace(neuron, c_mem=c) for c in caps]
    samples = cfg.resistance_samples if args.resistance_samples is None else args.resistance_samples
    if samples < 0:
        raise XbarError("--resistance-samples must be >= 0")
    reports = []
    # attenuator tuned separately for each device's SDF
    for idx, device in enumerate(devices):
        sdf = device.default_sdf if sdfs is None else sdfs[idx]
        atten = tuned_for_sdf(cfg.attenuator, sdf)
        reports.append(sweep(neurons, [device], [sdf], cfg.pulse, attenuator=atten,
                             resistance_samples=samples))
    grid = sorted((r for part in reports for r in part[:len(neurons)]), key=lambda r: (r.device, -r.c_mem))
    extra = [r for part in sorted(reports, key=lambda p: p[0].device) for r in part[len(neurons):]]
    rows = grid + extra
    write_sweep_csv(rows, out)
    return EXIT_OK if all(r.clean for r in rows) else EXIT_CONSTRAINT


def cmd_attenuate(cfg, args, out):
    dividers = [cfg.attenuator.bias_divider] if args.bias_divider is None else parse_quantity_list(args.bias_divider)
    if not dividers:
        raise XbarError("empty --bias-divider list")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("bias_divider", "i_in_amps", "i_out_amps", "sdf"))
    for alpha in dividers:
        atten = replace(cfg.attenuator, bias_divider=alpha)
        for i_in, i_out, sdf in sweep_curve(atten, args.imin, args.imax, args.points):
            writer.writerow((sci(alpha), sci(i_in), sci(i_out), sci(sdf)))
    return EXIT_OK


def cmd_simulate(cfg, args, out):
    if args.count is not None:
        if args.device is None:
            raise XbarError("--count requires --device")
        neuron, device, sdf, pulse = _resolve_point(cfg, args)
        device.require_resistance()
        if args.period is not None:
            pulse = replace(pulse, period=args.period)
        schedule = SpikeSchedule.repeated(device.r_lrs, pulse, args.count)
        analytic = fan_in(neuron, device, sdf, pulse)
    else:
        with open(args.schedule, encoding="utf-8") as fh:
            schedule = read_schedule_csv(fh)
        first = schedule.events[0]
        if args.device is not None:
            neuron, device, sdf, _ = _resolve_point(cfg, args)
            schedule.check_device(device)
        else:
            if args.sdf is None:
                raise XbarError("--schedule without --device needs --sdf")
            neuron, sdf = cfg.neuron, args.sdf
            if args.c_mem is not None:
                neuron = replace(neuron, c_mem=args.c_mem)
            if args.i_leak is not None:
                neuron = replace(neuron, i_leak=args.i_leak)
            if args.v_th is not None:
                neuron = replace(neuron, v_th=args.v_th)
            rs = [ev.resistance for ev in schedule.events]
            device = EnvmDeviceModel("CUSTOM", min(rs), max(rs), first.pulse.amplitude, sdf, label="schedule")
        uniform = all(ev.pulse == first.pulse and ev.resistance == first.resistance for ev in schedule.events)
        analytic = None
        if uniform and device.r_lrs <= first.resistance:
            analytic = fan_in(neuron, device, sdf, first.pulse, resistance=first.resistance)
    atten = tuned_for_sdf(cfg.attenuator, sdf) if args.tanh else IdealAttenuator(sdf)
    trace = simulate_column(neuron, atten, schedule, args.dt)

    trace.write_csv(out)
    if args.spikes:
        with open(args.spikes, "w", encoding="utf-8", newline="") as fh:
            trace.write_spikes_csv(fh)
    summary = sys.stdout if args.output is not None else sys.stderr
    analytic_n = None if analytic is None else analytic.fan_in
    if trace.first_fire_event is None:
        line = f"no fire after {len(schedule)} input events"
    else:
        line = (f"first fire at event {trace.first_fire_event} "
                f"(after {trace.first_fire_after_n_inputs} completed inputs)")
    if analytic_n is None:
        line += "; analytic fan_in n/a"
    else:
        line += f"; analytic fan_in {analytic_n}"
        if trace.first_fire_event is not None:
            line += f"; difference {trace.first_fire_event - analytic_n:+d}"
    print(line, file=summary)
    return EXIT_OK


def cmd_check(cfg, args, out):
    neuron = cfg.neuron if args.i_leak is None else replace(cfg.neuron, i_leak=args.i_leak)
    sat = check_saturation(cfg.attenuator)
    header = ("device", "sdf", "saturation", "sat_margin_v", "max_sdf", "sdf_ok",
              "band_spread", "band_flat", "leak_ok", "fan_in", "scale", "status")
    rows = []
    failed = False
    for label, device in cfg.devices.items():
        sdf = args.sdf if args.sdf is not None else device.default_sdf
        if device.is_placeholder:
            rows.append((label, f"{sdf:g}", "-", "-", "-", "-", "-", "-", "-", "-", "-",
                         "skipped: no resistance"))
            continue
        atten = tuned_for_sdf(cfg.attenuator, sdf)
        band = continuity_band(atten, device, neuron.i_leak, cfg.rel_tolerance, cfg.band_samples)
        cap = max_sdf(device.read_voltage / device.r_lrs, neuron.i_leak)
        rep = fan_in(neuron, device, sdf, cfg.pulse)
        problems = []
        if not sat.passed:
            problems.append(f"saturation margin {sat.margin * 1e3:.1f} mV")
        if sdf >= cap:
            problems.append(f"sdf {sdf:g} exceeds max_sdf {cap:g}")
        if not band.flat:
            problems.append(f"band spread {band.spread:.3g} > {cfg.rel_tolerance:g}")
        if not band.leak_ok:
            problems.append("attenuated band minimum below leak")
        if rep.fan_in is None:
            problems.append("leak-dominated")
        failed = failed or bool(problems)
        rows.append((
            label, f"{sdf:g}", "pass" if sat.passed else "FAIL", f"{sat.margin:+.4g}",
            f"{cap:g}", "yes" if sdf < cap else "NO", f"{band.spread:.3g}",
            "yes" if band.flat else "NO", "yes" if band.leak_ok else "NO",
            "-" if rep.fan_in is None else str(rep.fan_in),
            "-" if rep.scale is None else rep.scale.value,
            "ok" if not problems else "FAIL: " + "; ".join(problems),
        ))
    if args.csv:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    else:
        widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
        for r in [header] + rows:
            print("  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip(), file=out)
        for note in _assumption_notes(neuron):
            print(note, file=out)
    return EXIT_CONSTRAINT if failed else EXIT_OK


COMMANDS = {
    "fanin": cmd_fanin,
    "sweep": cmd_sweep,
    "attenuate": cmd_attenuate,
    "simulate": cmd_simulate,
    "check": cmd_check,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"xbar-fanin: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return exc.code or EXIT_OK

    try:
        if args.print_default_config or args.command == "print-default-config":
            with _output(args.output) as out:
                out.write(default_config_text())
            return EXIT_OK
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_INPUT
        cfg = load_config(args.config)
        with _output(args.output) as out:
            return COMMANDS[args.command](cfg, args, out)
    except BrokenPipeError:
        # downstream reader (e.g. head) closed early; not an input error
        sys.stderr.close()
        return EXIT_OK
    except (XbarError, ValueError, OSError) as exc:
        print(f"xbar-fanin: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entry():
    sys.exit(main())
