import pytest

from dateiv import Population
from dateiv.iv import IvNetConfig, build_iv_net


def make_pop(*rows):
    """Rows of (tau0, tau1, kappa0, kappa1); ids are "1", "2", ..."""
    return Population.from_tuples((str(k + 1), *r) for k, r in enumerate(rows))


@pytest.fixture
def two_mixed():
    return make_pop((0.2, 0.8, 0.1, 0.7), (0.5, 0.5, 0.3, 0.9))


@pytest.fixture
def two_mixed_net(two_mixed):
    return build_iv_net(two_mixed, IvNetConfig())


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num])
