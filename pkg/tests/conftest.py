from __future__ import annotations

import pytest

# (number, passed, detail) lines filled in by the acceptance tests
CRITERIA: list[tuple[int, bool, str]] = []


@pytest.fixture
def report():
    def add(number: int, passed: bool, detail: str):
        CRITERIA.append((number, bool(passed), detail))
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})")
        return passed
    return add


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(CRITERIA, key=lambda c: c[0]):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
