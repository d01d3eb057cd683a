import sys
from pathlib import Path

import numpy as np
import pytest

# tests import the reference helpers (oracles.py, golden.py, ...) as plain modules
sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance_line():
    """Record (and print) the one-line outcome of an acceptance criterion."""

    def record(number: int, status: str, detail: str) -> None:
        line = f"criterion {number:2d}: {status:4s} {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
