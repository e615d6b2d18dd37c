"""Flags shared by every subcommand and the report emitter."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any, Sequence

from app.core import storage
from app.core.errors import ConfigError

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def common_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--seed", type=int, default=0, help="seed of the PCG64 generator (default 0)")
    parser.add_argument("--tolerance-scale", type=float, default=1.0, help="multiply every check tolerance")
    parser.add_argument("--out", type=Path, default=None, help="output file (verify, geometry, gamma) or directory (evolve)")
    parser.add_argument("--format", choices=("json", "csv"), default=None, help="report format")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ...")
    parser.add_argument("--log-file", nargs="?", const=True, default=None, help="also log to a rotating file")
    parser.add_argument("--timings", action="store_true", help="include wall time in JSON reports")
    return parser


def parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"{what} must be comma separated numbers, got {text!r}") from exc


def parse_ints(text: str, what: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"{what} must be comma separated integers, got {text!r}") from exc


def emit(text: str, out: Path | None) -> None:
    """Write a rendered report to --out, or to stdout."""
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


def render(payload: Any, header: Sequence[str] | None, rows: Sequence[Sequence[Any]] | None, fmt: str) -> str:
    if fmt == "csv":
        if header is None or rows is None:
            raise ConfigError("this report has no csv form")
        return storage.format_csv(header, rows)
    return storage.dumps_json(payload)
