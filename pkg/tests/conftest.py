import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(number, description, check):
        try:
            check()
        except Exception:
            ACCEPTANCE_LINES.append((number, "FAIL", description))
            raise
        ACCEPTANCE_LINES.append((number, "PASS", description))

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, description in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {description}")
