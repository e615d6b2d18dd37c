import argparse
import sys
from pathlib import Path
from typing import Sequence

if __package__ is None or __package__ == "":
    sys.path.append(str(Path(__file__).resolve().parents[1]))

from app.cli import evolve_cmd, gamma_cmd, geometry_cmd, verify_cmd
from app.cli.common import EXIT_FAILED, EXIT_USAGE, common_parser
from app.core.errors import CliffBundleError, ConfigError, StabilityError
from app.core.logger import logger, setup_logger


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cliff_bundle",
        description="Clifford algebra, spinor geometry and bundle evolution checks",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    parents = [common_parser()]
    for module in (verify_cmd, geometry_cmd, evolve_cmd, gamma_cmd):
        module.add_parser(subparsers, parents)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    setup_logger(args.log_level, args.log_file)
    try:
        return args.handler(args)
    except ConfigError as exc:
        logger.error(f"config error: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StabilityError as exc:
        logger.error(f"unstable run: {exc}")
        if exc.suggested_dt is not None:
            print(f"error: {exc}\nsuggested dt: {exc.suggested_dt:.6g}", file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except CliffBundleError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except ValueError as exc:
        logger.error(f"invalid request: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
