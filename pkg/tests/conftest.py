import pytest

from critjac.family import JacobiFamily, SpectralWindow


@pytest.fixture(scope="session")
def fam():
    return JacobiFamily(2.0, 1.0, 0.4)


@pytest.fixture(scope="session")
def window():
    return SpectralWindow(1.0, 2.0)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Record one line per acceptance criterion; printed in the terminal summary."""

    def record(key: str, ok: bool, detail: str) -> bool:
        line = f"criterion {key:<3} {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
