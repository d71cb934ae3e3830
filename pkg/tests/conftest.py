import pytest

from heliodrop.stationary import solve_profile

LARGE_RHO0 = 0.02183599
SMALL_RHO0 = 0.02


@pytest.fixture(scope="session")
def large_profile():
    return solve_profile(LARGE_RHO0)


@pytest.fixture(scope="session")
def small_profile():
    return solve_profile(SMALL_RHO0)


ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, detail):
    """Keep one pass/fail line per acceptance criterion for the terminal summary."""
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
