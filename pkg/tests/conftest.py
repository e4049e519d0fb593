"""Shared pytest plumbing: the acceptance-criteria report.

Each acceptance test records exactly one pass/fail line through the
``criterion_report`` fixture; the lines are echoed in a dedicated section
at the end of the run so the verdict is visible even when pytest captures
stdout.
"""

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def criterion_report():
    def _report(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line, flush=True)
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
