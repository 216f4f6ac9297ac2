import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


def make_texture(rng: np.random.Generator, size: int = 64, noise: float = 2.0) -> np.ndarray:
    """Smooth random sinusoid mixture around mid-gray."""
    y, x = np.mgrid[0:size, 0:size].astype(float)
    img = np.full((size, size), 128.0)
    for _ in range(8):
        fx, fy = rng.uniform(-0.15, 0.15, size=2)
        img += rng.uniform(8, 24) * np.sin(2 * np.pi * (fx * x + fy * y) + rng.uniform(0, 2 * np.pi))
    img += rng.normal(0, noise, size=(size, size))
    return np.clip(img, 0, 255)


@pytest.fixture
def rng():
    return np.random.default_rng(20160501)


@pytest.fixture
def texture(rng):
    return lambda size=64, noise=2.0: make_texture(rng, size, noise)


# Acceptance criteria register one line each here; the lines are echoed in the
# terminal summary so they survive output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
