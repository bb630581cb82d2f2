import sys
from pathlib import Path

import pytest
from hypothesis import settings

# frozen oracle tables live next to the tests
sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

_VERDICTS = []


@pytest.fixture
def verdict():
    """Record and print one pass/fail line for an acceptance criterion."""

    def record(number, title, ok, detail):
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} | {detail}"
        _VERDICTS.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_VERDICTS):
        terminalreporter.write_line(line)
