import pytest

from zetagaps.arith import build_sieve

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def small_sieve():
    return build_sieve(10**4)


@pytest.fixture(scope="session")
def oracle_sieve():
    return build_sieve(10**6)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
