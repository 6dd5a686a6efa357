import sys

import pytest

from adhoccap.geometry import Arena


@pytest.fixture
def arena():
    """Running example: 6 m square, 3 GHz carrier."""
    return Arena(b=6.0, lam=0.1, k=3.5)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
