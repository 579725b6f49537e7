import functools
import time

import pytest

from hessext import Params, RadialGrid, maximize_supercritical, shoot

ACCEPTANCE_LINES = []
SOLVE_SECONDS = {}


@functools.lru_cache(maxsize=None)
def solved_extremal(N, k, alpha, n=4096):
    t0 = time.perf_counter()
    res = maximize_supercritical(Params(N, k, alpha), RadialGrid(n))
    SOLVE_SECONDS[(N, k, alpha, n)] = time.perf_counter() - t0
    return res


@functools.lru_cache(maxsize=None)
def solved_shoot(N, k, alpha, n=4096):
    return shoot(Params(N, k, alpha), RadialGrid(n))


@pytest.fixture(scope="session")
def grid():
    return RadialGrid()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
