import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

warnings.filterwarnings("ignore", message=".*TBB.*")

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = {}
CRITERIA = 10


@pytest.fixture
def acceptance():
    def record(k: int, ok: bool, detail: str) -> None:
        ACCEPTANCE[k] = (bool(ok), detail)
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    ran = any("test_acceptance" in str(r.nodeid) for reps in terminalreporter.stats.values() for r in reps
              if hasattr(r, "nodeid"))
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for k in range(1, CRITERIA + 1):
        ok, detail = ACCEPTANCE.get(k, (False, "not reached (error before the check)"))
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
