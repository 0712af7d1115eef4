import numpy as np
import pytest

from dfshift.tensor import ClipTensor

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def labeled_clip(channels, frames, h=1, w=1, base=0.0):
    """Clip whose (t, c) slab is filled with ``base + 10*t + c + 1``."""
    a = np.empty((frames, channels, h, w))
    for t in range(frames):
        for c in range(channels):
            a[t, c] = base + 10 * t + c + 1
    return ClipTensor(a)
