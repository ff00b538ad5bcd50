import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tinypy_gen import builtin_tinypy  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def grammar():
    return builtin_tinypy()


@pytest.fixture
def record_criterion():
    """Log one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def _record(number, title, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title}"
        if detail:
            line += f" ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
