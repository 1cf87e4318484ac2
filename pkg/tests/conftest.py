from pathlib import Path

import numpy as np
import pytest

from p2xsched import PairedPoints

ROOT = Path(__file__).resolve().parents[1]
SAMPLE = ROOT / "sample"
SAMPLE_CONFIG = SAMPLE / "sample.cfg"

# lines appended by the acceptance checks, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_points(rng, n, integer=False):
    if integer:
        price = rng.integers(0, 6, n).astype(float)
        intensity = rng.integers(0, 6, n).astype(float)
    else:
        price = rng.uniform(10, 90, n)
        intensity = rng.uniform(100, 500, n)
    return PairedPoints.from_arrays(price, intensity)
