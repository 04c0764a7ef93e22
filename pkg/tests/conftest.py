import numpy as np
import pytest

from sagnac_wigner.field import Grid1D

_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def grid():
    return Grid1D(256, 0.125)


@pytest.fixture
def wide_grid():
    return Grid1D(512, 0.05)


@pytest.fixture
def axis33():
    return np.linspace(-2.0, 2.0, 33)


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(n, ok, detail)``."""
    store = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(number, ok, detail=""):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        store.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
