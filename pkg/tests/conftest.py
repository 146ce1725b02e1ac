import numpy as np
import pytest

from hintindex import IntervalArray


def overlap_oracle(arr, qs, qe):
    """Plain numpy overlap filter, kept independent of the package kernels."""
    hit = (arr.st <= qe) & (arr.end >= qs)
    return np.sort(arr.ids[hit])


def random_intervals(rng, n, domain, max_len=None, id_space=None):
    max_len = max_len or max(1, domain // 8)
    st = rng.integers(0, domain, n)
    end = np.minimum(st + rng.integers(0, max_len, n), domain - 1)
    if id_space:
        ids = rng.choice(id_space, size=n, replace=False)
    else:
        ids = np.arange(n)
    return IntervalArray(ids, st, end)


def random_queries(rng, k, domain, max_extent=None, overhang=0):
    max_extent = max_extent or max(1, domain // 4)
    qs = rng.integers(-overhang, domain + overhang, k)
    qe = qs + rng.integers(0, max_extent, k)
    return np.column_stack([qs, qe])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---------------------------------------------------------------------------
# acceptance summary: one PASS/FAIL line per numbered criterion

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    prev = _CRITERIA.get(num, (title, "PASS"))[1]
    if rep.failed:
        _CRITERIA[num] = (title, "FAIL")
    elif rep.when == "call":
        _CRITERIA[num] = (title, prev)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, status = _CRITERIA[num]
        terminalreporter.write_line(f"{status}  criterion {num}: {title}")
