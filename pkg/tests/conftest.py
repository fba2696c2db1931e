import numpy as np
import pytest

from projqp.activeset_qp import MONITOR
from projqp.bench import run_two_circles


@pytest.fixture(autouse=True)
def _monitor_guard():
    """Every test runs with invariant checking on; violations fail the test."""
    before = MONITOR.violations
    yield
    assert MONITOR.violations == before, MONITOR.messages


@pytest.fixture(scope="session")
def two_circles_runs():
    """One shared run per cheap method (Haugazeau only in acceptance)."""
    out = {}
    for method in ("bap-gi", "sip-gi", "map", "dykstra"):
        out[method] = run_two_circles(method)
    return out


def rng_for(seed):
    return np.random.default_rng(seed)
