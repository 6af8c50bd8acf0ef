import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from varopkit.group import build_group

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large]
)
settings.load_profile("default")

SMALL_GROUPS = ["c2", "c3", "c4", "s3", "c2xc2", "d4", "q8"]

_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    k, title = mark.args
    status = "PASS" if rep.passed else "FAIL"
    _criteria[k] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_criteria):
        title, status = _criteria[k]
        terminalreporter.write_line(f"criterion {k:2d} {status}  {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=SMALL_GROUPS)
def small_group(request):
    return build_group(request.param)
