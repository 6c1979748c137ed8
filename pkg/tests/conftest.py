from fractions import Fraction as F

import pytest

from nonauto_entropy.coupled_expansion import CoverConfig
from nonauto_entropy.system_model import Interval, centered_tent_system, identity_system, tent_system
from nonauto_entropy.transition_matrix import TransitionMatrix, validate

# time-varying family with slopes 12/5 and 3 whose expanding branches both
# cover the two sets below
VARYING_SLOPES = (F(12, 5), F(3))
VARYING_CENTER = F(3, 10)


@pytest.fixture
def golden():
    return validate([[1, 1], [1, 0]])


@pytest.fixture
def full2():
    return TransitionMatrix.full(2)


@pytest.fixture
def tent2():
    return tent_system([2])


@pytest.fixture
def tent3():
    return tent_system([3])


@pytest.fixture
def varying():
    return centered_tent_system(VARYING_SLOPES, VARYING_CENTER)


@pytest.fixture
def identity():
    return identity_system()


@pytest.fixture
def halves():
    return CoverConfig([Interval(0, F(1, 2)), Interval(F(1, 2), 1)])


@pytest.fixture
def thirds():
    return CoverConfig([Interval(0, F(1, 3)), Interval(F(2, 3), 1)])


@pytest.fixture
def varying_cover():
    return CoverConfig([Interval(F(2, 15), F(7, 15)), Interval(F(8, 15), F(13, 15))])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
