import pytest

from higherbrackets.contexts import KINDS, LieContext

BASE = [("x", 0), ("y", 0), ("a", 1), ("b", 1)]
PARAMS = [("lam", 1), ("t", 0)]

# filled by the acceptance suite, printed after the run
ACCEPTANCE_LINES = {}


def make_ctx(kind, base=BASE, params=PARAMS):
    return LieContext.build(kind, base, params)


@pytest.fixture(params=KINDS)
def ctx(request):
    return make_ctx(request.param)


@pytest.fixture
def ops():
    return make_ctx("ops")


@pytest.fixture
def ham():
    return make_ctx("ham")


@pytest.fixture
def vect():
    return make_ctx("vect")


@pytest.fixture
def multivec():
    return make_ctx("multivec")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
