import pytest

from copop.selfmaps import blaschke, dilation, moebius, polynomial
from copop.weights import standard_weight

_ACCEPTANCE = {}


def corpus():
    """The five reference maps used across the suite."""
    return {
        "dilation-0.5": dilation(0.5),
        "z^2": polynomial([0, 0, 1]),
        "0.5z+0.5z^2": polynomial([0, 0.5, 0.5]),
        "sigma-0.5": moebius(0.5),
        "blaschke-2": blaschke([0.5, -0.3]),
    }


@pytest.fixture(scope="session")
def maps():
    return corpus()


@pytest.fixture(scope="session")
def w1():
    return standard_weight(1.0)


@pytest.fixture(scope="session")
def w2():
    return standard_weight(2.0)


@pytest.fixture
def criterion(request):
    """Record the outcome of an acceptance criterion by number."""
    marker = request.node.get_closest_marker("criterion")
    number, title = marker.args
    _ACCEPTANCE[number] = (title, "FAIL")
    yield
    if getattr(request.node, "rep_call_passed", False):
        _ACCEPTANCE[number] = (title, "PASS")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call_passed = rep.passed


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{status} criterion {number:2d}: {title}")
