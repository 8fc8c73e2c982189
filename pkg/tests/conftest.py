import numpy as np
import pytest

from swashmass import DesignParams


@pytest.fixture
def params():
    return DesignParams()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed after the test summary
_ACCEPTANCE_LINES = {}


@pytest.fixture
def report():
    """Record and print the pass/fail line of an acceptance criterion."""

    def _report(number, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
        _ACCEPTANCE_LINES[number] = line
        print(line)
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for number in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(_ACCEPTANCE_LINES[number])
