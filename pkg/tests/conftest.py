import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rotom import _backend  # noqa: E402
from rotom.reference import preset  # noqa: E402

BACKENDS = sorted(_backend.available())


@pytest.fixture(params=BACKENDS)
def kernel(request, monkeypatch):
    """Run a test once per available mobility kernel (numpy and compiled)."""
    impl = _backend.available()[request.param]
    monkeypatch.setattr(_backend, "mobility", impl.mobility)
    monkeypatch.setattr(_backend, "mobility_batch", impl.mobility_batch)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def pendulum():
    return preset("pendulum")


@pytest.fixture
def double_pendulum():
    return preset("double_pendulum")


@pytest.fixture
def arm():
    return preset("arm4dof")


# -- acceptance reporting ---------------------------------------------------------

_ACCEPTANCE: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    prev = _ACCEPTANCE.get(number, ("PASS", title, 0.0))
    status = prev[0] if report.passed else "FAIL"
    _ACCEPTANCE[number] = (status, title, prev[2] + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title, seconds = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}  ({seconds:.1f}s)")
