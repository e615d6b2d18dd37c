import os
import sys
from pathlib import Path

from loguru import logger


LOG_DIR = Path(__file__).resolve().parents[2] / "logs"
LOG_FILE = LOG_DIR / "cliff_bundle.log"


def setup_logger(level: str | None = None, log_file: Path | str | bool | None = None) -> None:
    """Configure logging to stderr and, optionally, a rotating file.

    stdout stays free for the JSON/CSV reports the CLI prints.
    """
    level = (level or os.environ.get("CLIFFBUNDLE_LOG_LEVEL") or "INFO").upper()

    logger.remove()
    logger.add(sys.stderr, level=level, format="{time:HH:mm:ss} | {level: <7} | {name}:{line} - {message}")

    if log_file:
        path = LOG_FILE if log_file is True else Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        logger.add(path, level=level, rotation="5 MB", enqueue=False)


__all__ = ["logger", "setup_logger"]
