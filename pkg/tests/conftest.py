import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tweezerload.quantities import CONSTANTS  # noqa: E402

KHZ = CONSTANTS.h * 1e3


@pytest.fixture
def kHz():
    return KHZ


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
