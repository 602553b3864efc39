import numpy as np
import pytest

from modgait import load_morphology

# Filled by test_acceptance; printed as a one-line-per-criterion summary.
ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def quad():
    return load_morphology("quad")


@pytest.fixture(scope="session")
def hexr():
    return load_morphology("hex")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for num, name, ok in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"  [{'PASS' if ok else 'FAIL'}] {num:>2}. {name}")
