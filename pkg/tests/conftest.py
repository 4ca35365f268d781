import numpy as np
import pytest

from freeconv.measures import make_discrete


def random_base(rng, max_atoms=3, spread=2.0):
    """Random discrete measure with 2..max_atoms atoms, kept away from mass thresholds."""
    m = int(rng.integers(2, max_atoms + 1))
    while True:
        x = np.sort(rng.uniform(-spread, spread, m))
        if np.min(np.diff(x)) > 0.05:
            break
    p = rng.dirichlet(np.ones(m))
    p = 0.05 + 0.95 * p
    p /= p.sum()
    return make_discrete(zip(x, p))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def bernoulli():
    return make_discrete([(-1.0, 0.5), (1.0, 0.5)])


# one PASS/FAIL line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
