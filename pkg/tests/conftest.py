import pytest

_LINES: list[str] = []


@pytest.fixture(scope="session")
def criterion():
    """``criterion(name, ok, detail)`` records a pass/fail line and asserts ``ok``."""

    def check(name: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" ({detail})" if detail else "")
        _LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
