import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance_lines():
    return _LINES


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_LINES):
        terminalreporter.write_line(_LINES[n])
