import time

import numpy as np
import pytest

from lbfcontrol.vehicle import VehicleParams


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def params():
    return VehicleParams()


_RUNS = {}


@pytest.fixture(scope="session")
def builtin_run():
    """Run a built-in scenario once per session and reuse the result."""
    from lbfcontrol.scenario import builtin
    from lbfcontrol.simulation import run_scenario

    def get(name):
        if name not in _RUNS:
            t0 = time.perf_counter()
            res = run_scenario(builtin(name))
            res.elapsed = time.perf_counter() - t0
            _RUNS[name] = res
        return _RUNS[name]

    return get


_VERDICTS = {}


@pytest.fixture
def verdict():
    """Record one acceptance line; fails the test when ``ok`` is false."""

    def record(criterion, ok, detail):
        line = f"{criterion} {'PASS' if ok else 'FAIL'}: {detail}"
        _VERDICTS[criterion] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_VERDICTS, key=lambda k: int(k[1:])):
        terminalreporter.write_line(_VERDICTS[key])
