import functools

import pytest
from hypothesis import HealthCheck, settings

from spiregraph.graphs import moebius, prism
from spiregraph.peaks import distinguishability
from spiregraph.tower import TowerParams

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# Acceptance lines collected by test_acceptance.py and echoed in the summary.
ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def ladder_peak(m: int, method: str = "serf", horizon_mult: float = 1.0,
                include_out_of_band: bool = False):
    """Memoized prism / Moebius peak result, shared across test modules."""
    ga, gb = prism(m), moebius(m)
    return distinguishability(ga, gb, TowerParams.for_graph(ga), method=method,
                              horizon_mult=horizon_mult,
                              include_out_of_band=include_out_of_band)


@pytest.fixture(scope="session")
def peak_of():
    return ladder_peak


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log():
    def log(number: int, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return log
