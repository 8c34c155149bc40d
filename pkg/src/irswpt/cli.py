"""Command-line front end for the experiment harness.

Subcommands: `run` executes a config and writes CSV or JSON results,
`validate` checks a config without running it, `defaults` prints the
canonical baseline config (optionally for a named scenario). Exit codes:
0 success, 1 configuration or validation failure, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

from .harness import (
    ConfigError,
    SWEEP_NAMES,
    default_spec,
    load_config,
    render_spec,
    run_experiment,
    write_results,
)

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irswpt",
        description="Surface-assisted wireless power transfer experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute an experiment config")
    run_p.add_argument("config", help="path to a key = value config file")
    run_p.add_argument("--out", default="-",
                       help="output path ('-' for stdout, the default)")
    run_p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="output format (default csv)")
    run_p.add_argument("--parallel", type=int, default=1, metavar="N",
                       help="worker processes (default 1; results identical)")
    run_p.add_argument("--seed", type=int, default=None, metavar="S",
                       help="override the config's master seed")
    run_p.add_argument("--timing", action="store_true",
                       help="record wall-clock times (breaks byte-identical "
                            "re-runs)")

    val_p = sub.add_parser("validate", help="check a config without running")
    val_p.add_argument("config", help="path to a key = value config file")

    def_p = sub.add_parser("defaults",
                           help="print the canonical baseline config")
    def_p.add_argument("scenario", nargs="?", default="convergence",
                       choices=sorted(SWEEP_NAMES),
                       help="scenario section to emit (default convergence)")
    return parser


def _cmd_run(args) -> int:
    spec = load_config(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        import dataclasses
        spec = dataclasses.replace(spec, master_seed=args.seed)
    if args.parallel < 1:
        raise ConfigError("--parallel must be >= 1")
    result = run_experiment(spec, parallelism=args.parallel,
                            include_timing=args.timing)
    write_results(result, args.out, fmt=args.format)
    return 0


def _cmd_validate(args) -> int:
    spec = load_config(args.config)
    cells = len(spec.sweep_values) * spec.trials * len(spec.algorithms)
    sys.stdout.write(
        f"ok: scenario={spec.scenario} algorithms={','.join(spec.algorithms)} "
        f"sweep={len(spec.sweep_values)} values trials={spec.trials} "
        f"seed={spec.master_seed} (~{cells} optimizer runs)\n"
    )
    return 0


def _cmd_defaults(args) -> int:
    sys.stdout.write(render_spec(default_spec(args.scenario)))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "validate": _cmd_validate,
                "defaults": _cmd_defaults}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        sys.stderr.write(f"runtime error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
