import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from zonediag import Box, FinitePointSet, Norm, Space
from zonediag.raster import Grid
from zonediag.regions import build
from zonediag.zone import iterate

settings.register_profile(
    "repo", deadline=None, suppress_health_check=[HealthCheck.too_slow], print_blob=True
)
settings.load_profile("repo")

FIG_SITES = [
    [1.5, 2.0], [4.5, 1.2], [8.3, 2.4], [2.2, 5.1],
    [6.1, 4.6], [8.8, 7.0], [3.4, 8.4], [6.6, 8.9],
]
L1_SITES = [[[2.0, 1.0], [-2.0, -1.0]], [[-2.0, 1.0], [2.0, -1.0]]]


@pytest.fixture
def three_points():
    return Space(FinitePointSet([[-1.0], [0.0], [1.0]]))


@pytest.fixture
def dyadic_interval():
    """[-1, 1] sampled at pitch 1/64, so every breakpoint used below is a world point."""
    return Space(FinitePointSet(np.linspace(-1, 1, 129)[:, None]))


@pytest.fixture(scope="session")
def square_trace():
    space = Space(Box((0, 0), (10, 10)), Norm.L2)
    grid = Grid.over(space.world, 512)
    ctx = build(space, [[p] for p in FIG_SITES], grid)
    return ctx, iterate(ctx, 200)


@pytest.fixture(scope="session")
def l1_trace():
    space = Space(Box((-6, -6), (6, 6)), Norm.L1)
    grid = Grid.over(space.world, 513)
    ctx = build(space, L1_SITES, grid)
    return ctx, iterate(ctx, 300)


@pytest.fixture(scope="session")
def line_trace():
    space = Space(Box((-6,), (6,)), Norm.L2)
    grid = Grid.over(space.world, 1201)
    ctx = build(space, [[[-1.0]], [[1.0]]], grid)
    return ctx, iterate(ctx, 500)


_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record one acceptance line; the lines are printed again at the end of the run."""

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
