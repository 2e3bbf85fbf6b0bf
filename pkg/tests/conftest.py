import numpy as np
import pytest

from rofc.ecc import Codec

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def inject_within_budget(codec: Codec, rng, at_radius=True) -> np.ndarray:
    """Error pattern that respects the codec's per-block correction budget.

    With ``at_radius`` every block carries the maximum correctable number of
    flips; otherwise the count is drawn uniformly up to that maximum.
    """
    e = np.zeros(codec.n, dtype=np.uint8)

    def flip(start, size, budget):
        count = budget if at_radius else rng.integers(0, budget + 1)
        pos = rng.choice(size, size=count, replace=False)
        e[start + pos] ^= 1

    m = codec.m
    if codec.kind == "rep":
        for g in range(codec.k):
            flip(g * m, m, (m - 1) // 2)
    elif codec.kind == "ham74":
        for b in range(codec.k // 4):
            flip(7 * b, 7, 1)
    else:
        for b in range(codec.k // 4):
            doomed = rng.integers(7)
            for g in range(7):
                start = (7 * b + g) * m
                if g == doomed:
                    flip(start, m, m)
                else:
                    flip(start, m, (m - 1) // 2)
    return e


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def inject():
    return inject_within_budget
