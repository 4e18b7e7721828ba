"""Shared test configuration: acceptance reporting and warning policy."""

import warnings

import pytest

from covts.processes import TruncationWarning

ACCEPTANCE_LINES = []


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    """Collect one pass/fail line per acceptance criterion."""
    line = f"ACCEPTANCE {number:>2}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def suppress_truncation_warning():
    """Silence the expected truncation diagnostic in strong-dependence runs."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        yield
