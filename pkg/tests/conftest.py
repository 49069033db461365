import pytest

from divchoice.io import load_fixture


@pytest.fixture
def ex1():
    return load_fixture("example1")


@pytest.fixture
def ex2():
    return load_fixture("example2")


@pytest.fixture
def ex3():
    return load_fixture("example3")



def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
