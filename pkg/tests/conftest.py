import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(capsys):
    """``report(name, ok, detail)`` prints one PASS/FAIL line and fails the test if not ok."""

    def report(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
