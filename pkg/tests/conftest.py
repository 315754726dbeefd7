import numpy as np
import pytest

from successhedge.claims import unit_linked_call
from successhedge.lattice import LatticeParams, build_lattice
from successhedge.scenarios import build_scenario_space
from successhedge.signals import mortality_model

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def ul1_lattice():
    return build_lattice(LatticeParams(s0=100, u=2, d=0.5, rho=0, steps=1, p_up=0.5))


@pytest.fixture
def ul1_space(ul1_lattice):
    return build_scenario_space(ul1_lattice, mortality_model(1, [0.2]))


@pytest.fixture
def ul1_claim(ul1_space):
    return unit_linked_call(ul1_space, 100)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
