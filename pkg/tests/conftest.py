import sys
from contextlib import contextmanager
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = {}


@contextmanager
def _record(number, title):
    try:
        yield
    except BaseException:
        _CRITERIA[number] = (title, "FAIL")
        print(f"[acceptance] {number:>2}. {title}: FAIL")
        raise
    _CRITERIA[number] = (title, "PASS")
    print(f"[acceptance] {number:>2}. {title}: PASS")


@pytest.fixture
def criterion():
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status = _CRITERIA[number]
        terminalreporter.write_line(f"{number:>2}. {title}: {status}")
