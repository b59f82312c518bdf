import time

import numpy as np
import pytest
from scipy.stats import unitary_group

from qdlab.dynamics import SweepConfig, run_sweep
from qdlab.states import bell_diagonal, random_state

SEED = 20111019


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture(scope="session")
def random_states():
    rng = np.random.default_rng(SEED)
    return [random_state(rng) for _ in range(1000)]


@pytest.fixture(scope="session")
def bell():
    return bell_diagonal((-1, -1, -1))


def random_local_unitary(rng):
    ua = unitary_group.rvs(2, random_state=rng)
    ub = unitary_group.rvs(2, random_state=rng)
    return np.kron(ua, ub)


PDC_EXAMPLE_STATE = {"type": "bell_diagonal", "c": [1.0, -0.6, 0.6], "d": 0.0}
BELL_STATE = {"type": "bell_diagonal", "c": [-1.0, -1.0, -1.0], "d": 0.0}
THIRD_STATE = {"type": "bell_diagonal", "c": [0.5, 0.0, 0.5], "d": -0.5}


def _timed_sweep(state, channel, **kw):
    cfg = SweepConfig(state=state, channel=channel, **kw)
    start = time.perf_counter()
    table = run_sweep(cfg)
    return table, time.perf_counter() - start


@pytest.fixture(scope="session")
def pdc_example_sweep():
    return _timed_sweep(PDC_EXAMPLE_STATE, "pdc")


@pytest.fixture(scope="session")
def adc_bell_sweep():
    return _timed_sweep(BELL_STATE, "adc")


@pytest.fixture(scope="session")
def third_sweep():
    return _timed_sweep(THIRD_STATE, "pdc")


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
