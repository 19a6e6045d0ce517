"""Shared fixtures: reference coefficients and the four solved instances.

Solves are session-scoped because several test modules interrogate the
same fixed points (iteration traces here, residuals and asymptotics in
the verification tests, end-to-end checks in the acceptance suite).
"""

import pytest

from fracasym.coeffexpr import Coefficient
from fracasym.meshfun import TailModel, make_graded_grid
from fracasym.solver import SolveSpec, solve

ALPHA = 0.5

# one verdict line per acceptance gate, echoed after the test summary so
# the ten PASS/FAIL lines are visible without -s
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_power_coefficient(text, amplitude, exponent, valid_from=1.0):
    return Coefficient.from_expression(
        text, envelope=TailModel("power", amplitude, exponent, valid_from))


@pytest.fixture(scope="session")
def default_grid():
    return make_graded_grid()


@pytest.fixture(scope="session")
def slow_decay_coeff():
    return make_power_coefficient("0.01 / (1+t)^3.5", 0.01, 3.5)


@pytest.fixture(scope="session")
def origin_quadratic_coeff():
    return make_power_coefficient("0.01 * t^2 / (1+t)^6", 0.01, 4.0)


@pytest.fixture(scope="session")
def heavy_tail_coeff():
    return make_power_coefficient("0.005 / (1+t)^2.5", 0.005, 2.5)


@pytest.fixture(scope="session")
def sign_change_coeff():
    return make_power_coefficient("0.01 * (1 - t) * exp(-t)", 7.0, 6.0)


@pytest.fixture(scope="session")
def solved_thm1(slow_decay_coeff):
    return solve(SolveSpec("thm1", ALPHA, 1.0, 1.0, slow_decay_coeff))


@pytest.fixture(scope="session")
def solved_thm2(origin_quadratic_coeff):
    return solve(SolveSpec("thm2", ALPHA, 1.0, 1.0, origin_quadratic_coeff))


@pytest.fixture(scope="session")
def solved_thm3(heavy_tail_coeff):
    return solve(SolveSpec("thm3", ALPHA, 0.3, 1.0, heavy_tail_coeff))


@pytest.fixture(scope="session")
def solved_lemma2(sign_change_coeff):
    return solve(SolveSpec("lemma2", ALPHA, 0.0, 0.0, sign_change_coeff))
