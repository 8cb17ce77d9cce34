"""Command line: ``sehasel {simulate,sweep,fit,envelope,calibrate-p}``.

Exit status 0 on success, 1 on invalid input, 2 on a numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from sehasel.circuit import envelope
from sehasel.errors import ConfigError, DataError, DomainError, NumericalError, RangeError, ValidationError
from sehasel.harness.config import ScenarioKind, load_config
from sehasel.harness.scenarios import frequency_sweep, hysteresis_sweep, run_scenario
from sehasel.harness.traceio import read_csv
from sehasel.sysid import (
    DecayScenario,
    DecayTrace,
    TraceKind,
    calibrate_p_from_displacement_drop,
    fit_exponential,
    format_fit_report,
)

log = logging.getLogger("sehasel")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


def _config(args):
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def cmd_simulate(args):
    cfg = _config(args)
    _, report = run_scenario(cfg, out_dir=args.out_dir)
    sys.stdout.write(report.format())
    return EXIT_OK


def cmd_sweep(args):
    cfg = _config(args)
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, "sweep.csv")
    if cfg.kind is ScenarioKind.HYSTERESIS_SWEEP:
        result = hysteresis_sweep(cfg, cfg.sweep.v_max, cfg.sweep.steps)
        text = result.table()
        sys.stdout.write(f"max_hysteresis_strain: {result.mhs:.9g}\n"
                         f"max_output_strain: {result.mos:.9g}\n")
    else:
        freqs, loads = cfg.sweep.frequencies, cfg.sweep.loads
        table = frequency_sweep(cfg, freqs, loads, workers=args.workers)
        rows = ["load_kg," + ",".join("%.9g" % f for f in freqs)]
        for m, row in zip(loads, table):
            rows.append("%.9g," % m + ",".join("%.9g" % v for v in row))
        text = "\n".join(rows) + "\n"
        sys.stdout.write(text)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return EXIT_OK


def cmd_fit(args):
    trace = read_csv(args.trace)
    t, values = trace.t, trace.columns[args.column]
    keep = t >= args.start
    if args.end is not None:
        keep &= t <= args.end
    decay = DecayTrace(float(trace.dt), np.abs(values[keep]), TraceKind(args.kind))
    result = fit_exponential(decay, magnitude=args.magnitude, k_known=args.k_known, robust=args.robust)
    sys.stdout.write(format_fit_report(result))
    return EXIT_OK


def cmd_envelope(args):
    cfg = load_config(args.config)
    params = cfg.circuit_params()
    freqs = args.frequency or [cfg.drive.frequency]
    sys.stdout.write(f"k: {params.k:.9g}\np: {params.p:.9g}\n")
    for f in freqs:
        env = envelope(params, f)
        sys.stdout.write(f"f={f:g}: k1: {env.k1:.9g} k2: {env.k2:.9g}\n")
    return EXIT_OK


def cmd_calibrate_p(args):
    cfg = load_config(args.config)
    scenario = DecayScenario(cfg.actuator_config(), cfg.plant_params().preload,
                             magnitude=cfg.drive.magnitude, k=cfg.circuit_params().k)
    p = calibrate_p_from_displacement_drop(args.drop, args.horizon, scenario)
    r_leak = cfg.circuit_params().with_decay_rate(p).r_leak
    sys.stdout.write(f"p: {p:.12g}\nr_leak: {r_leak:.9g}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sehasel", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="scenario config file")
        p.add_argument("--seed", type=int, help="override [scenario] seed")
        p.add_argument("--out-dir", default=".", help="directory for trace and report")
        p.add_argument("--format", choices=["csv"], default="csv")

    p = sub.add_parser("simulate", help="run one scenario")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="frequency sweep, or hysteresis sweep for hysteresis_sweep configs")
    common(p)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="fit an exponential decay to one trace column")
    p.add_argument("trace")
    p.add_argument("--column", default="u_o", choices=["u_o", "u_i", "x_b", "x_a"])
    p.add_argument("--kind", default="voltage", choices=[k.value for k in TraceKind])
    p.add_argument("--magnitude", type=float, default=1.0, help="input step magnitude [V]")
    p.add_argument("--k-known", type=float, help="divider ratio, for current traces")
    p.add_argument("--start", type=float, default=0.0, help="first time to use [s]")
    p.add_argument("--end", type=float, help="last time to use [s]")
    p.add_argument("--robust", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("envelope", help="steady AC envelope factors for a config's circuit")
    p.add_argument("config")
    p.add_argument("--frequency", type=float, action="append", help="drive frequency [Hz]; repeatable")
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("calibrate-p", help="decay rate reproducing a displacement drop")
    p.add_argument("drop", type=float, help="fractional drop, e.g. 0.065")
    p.add_argument("horizon", type=float, help="time of the drop [s]")
    p.add_argument("config")
    p.set_defaults(func=cmd_calibrate_p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        state = exc.state if isinstance(exc.state, dict) else {}
        if "last_state" in state:
            print(f"last valid state: {state['last_state']}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValidationError, DataError, DomainError, RangeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
