from collections import defaultdict

import pytest

# criterion number -> list of (part, passed, detail)
_ACCEPTANCE = defaultdict(list)
_TITLES = {}


@pytest.fixture
def criterion():
    def record(number, title, part, passed, detail):
        _TITLES[number] = title
        _ACCEPTANCE[number].append((part, bool(passed), detail))
        print(f"criterion {number} [{part}]: {'PASS' if passed else 'FAIL'} - {detail}")
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[number]
        ok = all(p for _, p, _ in parts)
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {_TITLES[number]}")
        for part, passed, detail in parts:
            terminalreporter.write_line(f"    {'pass' if passed else 'FAIL'}  {part}: {detail}")
