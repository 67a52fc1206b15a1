"""Command line entry point: ``workbench <command> ...``."""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from .hedging import DegenerateMarketWarning, NotReplicable
from .lp import LPSizeError
from .market import InstanceError
from .payoff import PayoffError
from .scenarios import get_scenario
from .workbench import (ACTIONS, COMMANDS, CONDITIONS, PRICE_OPS, InputError, InvariantViolation, load_instance,
                        run_command)

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="workbench", description="Exact superhedging workbench for trajectory sets.")
    p.add_argument("command", choices=COMMANDS)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--instance", help="instance JSON file")
    src.add_argument("--scenario", help="built-in scenario id, e.g. SCN-C")
    p.add_argument("--N", type=int, help="family truncation for --scenario")
    p.add_argument("--M", type=int, help="maturity cap for --scenario")
    p.add_argument("--payoff", help="payoff expression, e.g. 'abs(S[1]-1)'")
    p.add_argument("--op", choices=PRICE_OPS)
    p.add_argument("--condition", choices=CONDITIONS)
    p.add_argument("--action", choices=ACTIONS)
    p.add_argument("--measure", help="measure JSON mapping label -> 'p/q'")
    p.add_argument("--unrestricted", action="store_true", help="dual over all classes, not just off the null set")
    p.add_argument("--regimes", help="comma separated M:N pairs for sweep")
    p.add_argument("--format", choices=("txt", "csv", "md"), default=None)
    p.add_argument("--out", help="write output to this file")
    return p


def _required(args) -> None:
    need = {"price": "op", "check": "condition", "martingale": "action"}
    flag = need.get(args.command)
    if flag and getattr(args, flag) is None:
        raise UsageError(f"workbench: error: {args.command} requires --{flag}")
    if args.command != "sweep" and not (args.instance or args.scenario):
        raise UsageError("workbench: error: give --instance FILE or --scenario ID")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _required(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateMarketWarning)
            if args.command == "sweep":
                instance = None
            elif args.instance:
                instance = load_instance(args.instance)
            else:
                try:
                    instance = get_scenario(args.scenario).build(args.N, args.M)
                except KeyError as exc:
                    raise InputError(exc.args[0]) from None
            report = run_command(args.command, instance, args)
    except (InputError, InstanceError, PayoffError, LPSizeError, NotReplicable) as exc:
        print(f"workbench: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantViolation as exc:
        print(f"workbench: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    style = args.format or ("md" if args.command == "report" else "txt")
    text = report.render(style)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.ok else EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
