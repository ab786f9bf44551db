"""Command-line front end: sweeps, threshold tables, MC runs, estimation.

Exit codes: 0 success, 1 bad config or input file, 2 runtime failure,
3 finished with warnings (some Monte Carlo rows lacked statistics).
"""

import argparse
import json
import math
import os
import sys

from .configio import ConfigError, load_spec
from .montecarlo import (
    InsufficientStatisticsError,
    TallyFormatError,
    estimate,
    load_tally,
    save_tally,
)
from .rates import (
    NoZeroCrossingError,
    ProtocolKind,
    SweepVariable,
    find_zero_threshold,
)
from .sweep import SweepMode, run_sweep
from .tableio import write_csv, write_json

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_WARNINGS = 3

_THRESHOLD_PROTOCOLS = (ProtocolKind.BB84_XY, ProtocolKind.BB84_XZ,
                        ProtocolKind.SIX_STATE)


class _ArgumentParser(argparse.ArgumentParser):
    # bad usage is a config problem, not a runtime one
    def error(self, message):
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _emit(rows, output) -> None:
    write_csv(rows, output["csv"])
    print(f"wrote {len(rows)} rows to {output['csv']}")
    if "json" in output:
        write_json(rows, output["json"])
        print(f"wrote {len(rows)} rows to {output['json']}")


def _cmd_sweep(args) -> int:
    spec, output = load_spec(args.config)
    if spec.mode is not SweepMode.ANALYTIC:
        raise ConfigError("[sweep] mode: the sweep subcommand runs analytic "
                          "sweeps; use the mc subcommand for montecarlo mode")
    if "tally_dir" in output:
        raise ConfigError("[output] tally_dir: only valid for the mc subcommand")
    result = run_sweep(spec)
    _emit(list(result.rows), output)
    return EXIT_OK


def _cmd_mc(args) -> int:
    spec, output = load_spec(args.config)
    if spec.mode is not SweepMode.MONTECARLO:
        raise ConfigError("[sweep] mode: the mc subcommand runs montecarlo "
                          "sweeps; use the sweep subcommand for analytic mode")
    result = run_sweep(spec)
    _emit(list(result.rows), output)
    if "tally_dir" in output:
        directory = output["tally_dir"]
        os.makedirs(directory, exist_ok=True)
        for index, tally in enumerate(result.tallies):
            save_tally(tally, os.path.join(directory, f"point_{index:04d}.tally"))
        print(f"wrote {len(result.tallies)} tallies to {directory}")
    check = result.crosscheck
    if check is not None and check.checked:
        print(f"cross-check: {check.within}/{check.checked} estimates within "
              f"3 sigma of closed form (fraction {check.fraction:.6f})")
    for line in result.warnings:
        print(f"warning: {line}", file=sys.stderr)
    return EXIT_WARNINGS if result.warnings else EXIT_OK


def _cmd_thresholds(args) -> int:
    p = args.noise
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"--noise: probability must lie in [0, 1], got {p}")
    for variable in (SweepVariable.ROTATION, SweepVariable.FLUCTUATION):
        for kind in _THRESHOLD_PROTOCOLS:
            try:
                value = find_zero_threshold(kind, p, variable)
            except (NoZeroCrossingError, ValueError) as exc:
                raise RuntimeError(
                    f"{kind.value} {variable.value}: {exc}") from None
            print(f"{kind.value} {variable.value} "
                  f"{value:.9f} {value / math.pi:.9f}")
    return EXIT_OK


def _cmd_estimate(args) -> int:
    report = estimate(load_tally(args.tally))
    payload = {
        "qber": report.qber,
        "qber_err": report.qber_err,
        "correlators": report.correlators,
        "correlator_errs": report.correlator_errs,
        "sifted_counts": report.sifted_counts,
        "c": report.c,
        "c_err": report.c_err,
        "rates": {k.value: v for k, v in report.rates.items()},
        "rates_clamped": {k.value: v for k, v in report.rates_clamped.items()},
    }
    print(json.dumps(payload, indent=1))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="rfiqkd",
        description="Key rates and pulse-level simulation of BB84, six-state "
                    "and frame-independent QKD under polarization frame "
                    "rotation and fluctuation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run an analytic sweep from a config")
    p_sweep.add_argument("config", help="run configuration file")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_mc = sub.add_parser("mc", help="run a Monte Carlo sweep from a config")
    p_mc.add_argument("config", help="run configuration file")
    p_mc.set_defaults(func=_cmd_mc)

    p_thr = sub.add_parser("thresholds",
                           help="zero-rate rotation and fluctuation thresholds")
    p_thr.add_argument("--noise", type=float, required=True, metavar="P",
                       help="depolarizing probability p")
    p_thr.set_defaults(func=_cmd_thresholds)

    p_est = sub.add_parser("estimate", help="estimate rates from a tally file")
    p_est.add_argument("tally", help="tally file written by mc or save_tally")
    p_est.set_defaults(func=_cmd_estimate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TallyFormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InsufficientStatisticsError, RuntimeError, ValueError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
