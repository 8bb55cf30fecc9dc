import warnings

import pytest

from memdecay.errors import ResolutionWarning


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numerical reproduction")


@pytest.fixture
def quiet_resolution():
    """Silence the first-step resolution warning inside a test."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
