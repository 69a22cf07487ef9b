import pytest

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def record_criterion():
    """Store (name, passed, detail) for criterion k and print it."""

    def record(k: int, name: str, passed: bool, detail: str = "") -> None:
        _ACCEPTANCE[k] = (name, passed, detail)
        print(_line(k, name, passed, detail))

    return record


def _line(k, name, passed, detail):
    return f"criterion {k:2d} {'PASS' if passed else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_line(k, *_ACCEPTANCE[k]))
