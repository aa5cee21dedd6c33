from pathlib import Path

import numpy as np
import pytest

from linklab.framing import FrameConfig

DATA = Path(__file__).parent / "data"


@pytest.fixture
def cfg():
    return FrameConfig()


@pytest.fixture
def np_rng():
    return np.random.default_rng(20240611)


def random_complex(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


# filled by test_acceptance.py, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
