"""
Command-line entry point.

    python main.py run stores/coupled_oscillator.json --out results/
    python main.py check-identities --seed 0 --trials 100
    python main.py example --name coupled-oscillator --out scenario.json

Exit codes: 0 when every verdict and identity passes, 1 when any fails,
2 for usage and scenario errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

from constants import Verdict
from identities import check_identities
from pipeline import run
from scenario import EXAMPLES, ScenarioError, example_text, load_scenario
from serialize import dump_results

logger = logging.getLogger("hybrid")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hybrid", description="Symmetric hybrid classical-quantum dynamics.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="-v for progress, -vv for debug output.")
    commands = p.add_subparsers(dest="command", required=True)

    run_p = commands.add_parser("run", help="Run a scenario and write results.json, bounds.csv and spreads.csv.")
    run_p.add_argument("scenario", type=Path, help="Scenario JSON document.")
    run_p.add_argument("--out", type=Path, required=True, help="Output directory (created if missing).")
    run_p.add_argument("--threads", type=positive_int, default=1)
    run_p.add_argument("--seed", type=int, default=0, help="Recorded in the result bundle.")

    ident_p = commands.add_parser("check-identities", help="Randomized checks of the algebraic identities.")
    ident_p.add_argument("--seed", type=int, default=0)
    ident_p.add_argument("--trials", type=positive_int, default=100)

    example_p = commands.add_parser("example", help="Print or write a bundled scenario document.")
    example_p.add_argument("--name", choices=sorted(EXAMPLES), default="coupled-oscillator")
    example_p.add_argument("--out", type=Path, help="Write to this file instead of stdout.")
    return p


def _run(args: argparse.Namespace) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except OSError as e:
        print(f"hybrid: cannot read {args.scenario}: {e.strerror}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as e:
        print(f"hybrid: invalid scenario {args.scenario}: {e}", file=sys.stderr)
        return EXIT_USAGE
    bundle = run(scenario, threads=args.threads, seed=args.seed)
    out = dump_results(bundle, args.out)
    print(f"{bundle.count(Verdict.PASS)} passed, {bundle.count(Verdict.FAIL)} failed, "
          f"{bundle.count(Verdict.SKIPPED)} skipped; results in {out}")
    for note in bundle.warnings:
        print(f"warning: {note}", file=sys.stderr)
    return EXIT_OK if bundle.passed else EXIT_FAILED


def _check_identities(args: argparse.Namespace) -> int:
    report = check_identities(seed=args.seed, trials=args.trials)
    for residual in report.residuals:
        status = "ok" if residual.passed else "FAILED"
        print(f"{residual.name:<26} {residual.max_residual:.3e}  (relative {residual.max_relative:.3e}, "
              f"threshold {residual.threshold:.0e})  {status}")
    return EXIT_OK if report.passed else EXIT_FAILED


def _example(args: argparse.Namespace) -> int:
    text = example_text(args.name)
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
        logger.info("Wrote %s to %s", args.name, args.out)
    return EXIT_OK


COMMANDS = {
    "run": _run,
    "check-identities": _check_identities,
    "example": _example,
}


def main(argv: Optional[list[str]] = None) -> int:
    """Parse argv and dispatch; argparse usage errors exit with status 2 on their own."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
