import os

import pytest
from hypothesis import HealthCheck, settings

from synodyne import make_params

settings.register_profile("repo", deadline=None, derandomize=True, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

# Figure 2 caption parameters (kappa = 1)
OMEGA_M = 0.2
GAMMA_M = 0.002
# larger mechanical linewidth used for long stochastic runs
GAMMA_FAST = 0.01


@pytest.fixture
def fig_params():
    return make_params(OMEGA_M, GAMMA_M, 0.0, c_om=0.9)


@pytest.fixture
def fast_params():
    return make_params(OMEGA_M, GAMMA_FAST, 0.0, c_om=0.9)


# one line per acceptance criterion, shown in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def report_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
