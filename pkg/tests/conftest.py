import functools

import pytest

from spherepinch.warped import make_pinch_family, make_round_sphere


@functools.lru_cache(maxsize=None)
def round_metric(n: int = 3):
    return make_round_sphere(n)


@functools.lru_cache(maxsize=None)
def pinch_metric(k: int, n: int = 3):
    return make_pinch_family(n, k)[0]


@pytest.fixture(scope="session")
def round3():
    return round_metric(3)


@pytest.fixture(scope="session")
def pinch1000():
    return pinch_metric(1000)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
