import numpy as np
import pytest

from qhistories import build_wigner_scenario, enumerate_history_vector

ALPHA, BETA = 3 / 5, 4 / 5


@pytest.fixture
def rng():
    return np.random.default_rng(20251016)


@pytest.fixture
def wigner():
    return build_wigner_scenario(ALPHA, BETA)


@pytest.fixture
def wigner_hv(wigner):
    return enumerate_history_vector(wigner)


_criteria = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _criteria.append((marker.args[0], marker.args[1], rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, text, passed in sorted(_criteria):
        terminalreporter.write_line(f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {text}")
