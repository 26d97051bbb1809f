import shutil

import pytest

from bonsai_checker.symcore import Session

HAVE_Z3 = shutil.which("z3") is not None
needs_solver = pytest.mark.skipif(not HAVE_Z3, reason="z3 binary not on PATH")


@pytest.fixture
def session():
    with Session() as s:
        yield s


@pytest.fixture
def classic_session():
    with Session(encoding="classic") as s:
        yield s


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
