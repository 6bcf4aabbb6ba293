import shutil

import pytest

import acceptance_log
from relvc import load_corpus, smt

HAVE_SOLVER = shutil.which(smt.solver_command()[0]) is not None

needs_solver = pytest.mark.skipif(not HAVE_SOLVER, reason="no SMT solver on PATH")


@pytest.fixture(scope="session")
def csum():
    return load_corpus("csum.rl")


@pytest.fixture(scope="session")
def csum_no_pair():
    return load_corpus("csum_no_pair_contract.rl")


def pytest_terminal_summary(terminalreporter):
    if not acceptance_log.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance_log.lines():
        terminalreporter.write_line(line)
    for title, rows in acceptance_log.TABLES:
        terminalreporter.write_line("")
        terminalreporter.write_line(title)
        for row in rows:
            terminalreporter.write_line(row)
