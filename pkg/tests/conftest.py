import math

import pytest

from greeneq import CompactSet, ExternalField, GreenDomain

LOG3 = math.log(3.0)


@pytest.fixture
def hp():
    return GreenDomain.half_plane()


@pytest.fixture
def disk():
    return GreenDomain.unit_disk()


@pytest.fixture
def K12():
    return CompactSet.intervals([[1.0, 2.0]])


@pytest.fixture
def f_minus1(K12):
    return ExternalField.constant(K12, -1.0)


ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    """Log one acceptance line; shown in the terminal summary."""
    line = f"{'PASS' if ok else 'FAIL'} [{criterion}] {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
