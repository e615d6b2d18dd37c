import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from app.core.logger import logger, setup_logger  # noqa: E402


@pytest.fixture(autouse=True)
def _quiet_logs() -> None:
    setup_logger("WARNING")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(1234))


@pytest.fixture
def warnings_logged():
    """Messages logged at WARNING or above while the test runs."""
    messages: list[str] = []
    sink = logger.add(lambda message: messages.append(message.record["message"]), level="WARNING")
    yield messages
    logger.remove(sink)
