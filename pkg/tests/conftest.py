"""Shared pytest plumbing: echo the acceptance-criterion lines after the run."""

import pytest

_acceptance_lines: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Accumulates one PASS/FAIL line per acceptance criterion."""
    return _acceptance_lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.line(line)
