import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, text = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        prev = _criteria.get(num)
        # a criterion split over several tests fails if any part fails
        if prev is None or prev[0] == "PASS" or status == "FAIL":
            _criteria[num] = (status, text)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        status, text = _criteria[num]
        terminalreporter.write_line(f"[{status}] criterion {num}: {text}")


def random_spd(rng, p, scale=0.5):
    """SPD matrix built with numpy's LAPACK eigh, independent of the package."""
    a = rng.normal(scale=scale, size=(p, p))
    s = (a + a.T) / 2
    w, u = np.linalg.eigh(s)
    c = (u * np.exp(w)) @ u.T
    return (c + c.T) / 2


def random_sym(rng, p, scale=0.5):
    a = rng.normal(scale=scale, size=(p, p))
    return (a + a.T) / 2


def random_rotation(rng, p):
    q, r = np.linalg.qr(rng.normal(size=(p, p)))
    return q * np.sign(np.diag(r))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
