import sys

import pytest

# Isolated, site-less interpreter: same semantics for the canned scripts, much faster startup.
FAST_PYTHON = f"{sys.executable} -I -S"


@pytest.fixture
def fast_python():
    return FAST_PYTHON


# Acceptance verdict lines, filled by test_acceptance and echoed after the run.
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
