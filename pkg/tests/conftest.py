import pytest

from cavity_detector.kinematics import FreeFallWorldline, RindlerWorldline, SchwarzschildBackground


# Acceptance verdicts, echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def bg10():
    return SchwarzschildBackground(1.0, 10.0)


@pytest.fixture
def freefall10(bg10):
    return FreeFallWorldline(bg10)


@pytest.fixture
def rindler10(bg10):
    return RindlerWorldline(bg10.m / (bg10.R**2 * bg10.redshift))
