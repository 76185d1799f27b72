import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from momtransform.curves import Box, HilbertCurve

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def square6():
    return HilbertCurve(Box.unit(2), 6)


@pytest.fixture(scope="session")
def square10():
    return HilbertCurve(Box.unit(2), 10)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, ok, detail)``."""

    def record(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
        _ACCEPTANCE.append((number, line))
        print(line)
        return ok

    return record


def pytest_sessionstart(session):
    import time

    session.config._mt_started = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    import time

    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
    elapsed = time.perf_counter() - config._mt_started
    tag = "PASS" if elapsed < 120 else "FAIL"
    terminalreporter.write_line(f"[{tag}] criterion 10: full suite runtime {elapsed:.1f} s (budget 120 s)")
