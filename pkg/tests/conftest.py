import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from eeqt_arrival.analytic import DetectorSpec, GaussianPacket

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def reference_packet():
    return GaussianPacket(x0=-8.0, v=2.0)


@pytest.fixture
def centered_packet():
    return GaussianPacket(x0=0.0, v=0.0)


@pytest.fixture
def detector():
    return DetectorSpec(a=0.0, alpha=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert."""

    def report(number: int, name: str, passed: bool, detail: str):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d} {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
