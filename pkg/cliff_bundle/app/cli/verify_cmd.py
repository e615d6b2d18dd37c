from __future__ import annotations

import argparse

from app.cli.common import EXIT_FAILED, EXIT_OK, emit, render
from app.core.models import thread_cap
from app.verify.suites import SUITES, run_suite


def add_parser(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("verify", parents=parents, help="run invariant checks")
    parser.add_argument("--suite", choices=SUITES + ("all",), default="all")
    parser.add_argument("--perturb", type=float, default=0.0, help="inject noise of this size (fault mode)")
    parser.set_defaults(handler=cmd_verify)


def cmd_verify(args: argparse.Namespace) -> int:
    report = run_suite(
        args.suite,
        seed=args.seed,
        tolerance_scale=args.tolerance_scale,
        perturb=args.perturb,
        workers=thread_cap(),
    )
    fmt = args.format or "json"
    header, rows = report.csv_rows()
    emit(render(report.to_dict(include_timing=args.timings), header, rows, fmt), args.out)
    return EXIT_OK if report.passed else EXIT_FAILED
