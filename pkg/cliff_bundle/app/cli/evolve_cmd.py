"""`evolve`: run one experiment config and write its series, trajectory and summary."""

from __future__ import annotations

import argparse
from pathlib import Path

from app.cli.common import EXIT_OK, emit, render
from app.core import storage
from app.core.logger import logger
from app.core.models import load_experiment_config
from app.evolution.experiment import ExperimentResult, run_experiment


def add_parser(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("evolve", parents=parents, help="run an evolution experiment")
    parser.add_argument("config", help="experiment config JSON")
    parser.set_defaults(handler=cmd_evolve)


def write_outputs(result: ExperimentResult, out_dir: Path, outputs: list[str], include_timing: bool) -> list[Path]:
    written = [storage.write_csv(out_dir / "series.csv", result.series_header(), result.series_rows())]
    if "trajectory" in outputs and result.states is not None:
        path, header = storage.write_field(
            out_dir / "trajectory.bin",
            result.trajectory_array(),
            spacing=[float(result.times[1] - result.times[0]) if result.times.size > 1 else 1.0, result.dx],
            origin=[0.0, 0.0],
            extra={"axes": ["t", "x"], "engine": result.engine},
        )
        written += [path, header]
    written.append(storage.write_json(out_dir / "summary.json", result.summary(include_timing)))
    return written


def cmd_evolve(args: argparse.Namespace) -> int:
    config = load_experiment_config(args.config)
    result = run_experiment(config)
    if args.out is not None:
        written = write_outputs(result, args.out, config.outputs, args.timings)
        logger.info(f"evolve wrote files={len(written)} dir={args.out}")
    fmt = args.format or "json"
    emit(render(result.summary(args.timings), result.series_header(), result.series_rows(), fmt), None)
    return EXIT_OK
