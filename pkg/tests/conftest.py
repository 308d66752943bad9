import numpy as np
import pytest

from rtsgm import _backend
from rtsgm.core import GrayImage

BACKENDS = _backend.available()


@pytest.fixture(params=BACKENDS)
def kernels(request):
    """Each kernel backend that is importable here."""
    return _backend.load(request.param)


def shifted_pair(width, height, shift, seed=0, margin=16):
    """Random texture pair where left(x, y) == right(x - shift, y) wherever both exist."""
    rng = np.random.default_rng(seed)
    base = rng.integers(0, 256, (height, width + shift + margin), dtype=np.uint8)
    left = GrayImage(base[:, :width])
    right = GrayImage(base[:, shift:width + shift])
    return left, right


def random_pair(width, height, seed=0):
    rng = np.random.default_rng(seed)
    return (GrayImage(rng.integers(0, 256, (height, width), dtype=np.uint8)),
            GrayImage(rng.integers(0, 256, (height, width), dtype=np.uint8)))


# acceptance summary lines, filled in by test_acceptance.py
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[key])
