"""Command-line front end.

Subcommands:
    simulate       run a configured simulation and write its CSV record
    gradient-flow  same, with the mode forced to gradient_flow
    freqs          generate or validate dither frequency multipliers
    average-check  verify the fourth-order averaging residual on a config

Exit codes: 0 success, 1 usage or config error, 2 integration integrity error,
3 invalid frequencies, 4 property-check failure.  Machine-readable output is
``key=value`` with floats at 17 significant digits.  Command-line flags
override config-file values.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .dither import DitherSchedule, generate_frequencies, validate_frequencies
from .dynamics import averaged_field, directional_derivatives
from .experiment import (ConfigError, ExperimentConfig, initial_configuration,
                         load_config, run, ultimate_bound, write_csv)
from .groups import IntegrityError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INTEGRITY = 2
EXIT_FREQUENCIES = 3
EXIT_PROPERTY = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; 2 is reserved for integrity
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _load(args, force_mode: str | None = None) -> ExperimentConfig:
    from pathlib import Path
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    overrides: dict[str, str] = {}
    mode = force_mode or getattr(args, "mode", None)
    if mode:
        overrides["mode"] = {"es": "extremum_seeking",
                             "gradient": "gradient_flow"}.get(mode, mode)
    if getattr(args, "omega", None) is not None:
        overrides["omega"] = str(args.omega)
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = str(args.seed)
    return load_config(path.read_text(), base_dir=path.parent, overrides=overrides)


def _cmd_simulate(args, force_mode: str | None = None) -> int:
    cfg = _load(args, force_mode)
    record = run(cfg)
    write_csv(record, args.out)
    print(f"initial_J={_fmt(record.costs[0])}")
    print(f"final_J={_fmt(record.costs[-1])}")
    print(f"final_dispersion={_fmt(record.dispersions[-1])}")
    print(f"ultimate_bound={_fmt(ultimate_bound(record, cfg.tail_fraction))}")
    return EXIT_OK


def _cmd_freqs(args) -> int:
    if (args.count is None) == (args.validate is None):
        print("freqs: give exactly one of --count or --validate", file=sys.stderr)
        return EXIT_USAGE
    if args.count is not None:
        if args.count < 1:
            print("freqs: --count must be >= 1", file=sys.stderr)
            return EXIT_USAGE
        print(" ".join(str(k) for k in generate_frequencies(args.count)))
        return EXIT_OK
    try:
        values = [int(tok) for tok in args.validate.replace(",", " ").split()]
        if not values:
            raise ValueError("empty list")
        report = validate_frequencies(values)
    except ValueError as exc:
        print(f"freqs: malformed multiplier list: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(report.describe())
    return EXIT_OK if report.ok else EXIT_FREQUENCIES


def _cmd_average_check(args) -> int:
    try:
        levels = [float(tok) for tok in args.amplitudes.replace(",", " ").split()]
    except ValueError:
        print("average-check: malformed amplitude list", file=sys.stderr)
        return EXIT_USAGE
    if len(levels) < 2:
        print("average-check: need at least two amplitude levels", file=sys.stderr)
        return EXIT_USAGE
    if any(a <= 0 for a in levels) or any(b >= a for a, b in zip(levels, levels[1:])):
        print("average-check: amplitudes must be positive and strictly decreasing",
              file=sys.stderr)
        return EXIT_USAGE

    cfg = _load(args)
    cfg_initial = initial_configuration(cfg)
    derivs = directional_derivatives(cfg.net, cfg_initial)

    all_ok = True
    prev_residual = None
    prev_level = None
    for level in levels:
        schedule = DitherSchedule(
            np.full((cfg.schedule.m, cfg.schedule.n), level),
            cfg.schedule.base_omega, cfg.schedule.multipliers,
            max(cfg.schedule.amplitude_cap,
                1.000001 * level * np.sqrt(cfg.schedule.n)))
        avg = averaged_field(cfg.net, cfg_initial, schedule, gain=cfg.gain)
        residual = float(np.max(np.abs(
            avg.coeffs - (-(level * level / 2.0) * derivs))))
        if prev_residual is None:
            print(f"a={_fmt(level)} residual={_fmt(residual)} ratio=-")
        else:
            ratio = prev_residual / residual
            scale = (prev_level / level) ** 4
            ok = 0.5 * scale <= ratio <= 2.0 * scale
            all_ok = all_ok and ok
            print(f"a={_fmt(level)} residual={_fmt(residual)} "
                  f"ratio={_fmt(ratio)} expected=[{_fmt(0.5 * scale)},{_fmt(2.0 * scale)}] "
                  f"ok={'yes' if ok else 'no'}")
        prev_residual, prev_level = residual, level
    return EXIT_OK if all_ok else EXIT_PROPERTY


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="liesync",
                     description="extremum-seeking synchronization on SO(3)/SE(3)")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a simulation, write a CSV record")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", required=True)
    sim.add_argument("--mode", choices=["es", "gradient"])
    sim.add_argument("--omega", type=float)
    sim.add_argument("--seed", type=int)

    grad = sub.add_parser("gradient-flow", help="run the gradient reference flow")
    grad.add_argument("--config", required=True)
    grad.add_argument("--out", required=True)
    grad.add_argument("--omega", type=float)
    grad.add_argument("--seed", type=int)

    freqs = sub.add_parser("freqs", help="generate or validate dither multipliers")
    freqs.add_argument("--count", type=int)
    freqs.add_argument("--validate", metavar="LIST")

    avg = sub.add_parser("average-check",
                         help="fourth-order averaging residual diagnostic")
    avg.add_argument("--config", required=True)
    avg.add_argument("--amplitudes", required=True, metavar="LIST")
    avg.add_argument("--omega", type=float)
    avg.add_argument("--seed", type=int)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "gradient-flow":
            return _cmd_simulate(args, force_mode="gradient_flow")
        if args.command == "freqs":
            return _cmd_freqs(args)
        return _cmd_average_check(args)
    except ConfigError as exc:
        print(f"{parser.prog}: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrityError as exc:
        print(f"{parser.prog}: integrity error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY


if __name__ == "__main__":
    sys.exit(main())
