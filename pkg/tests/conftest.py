import pytest

from coopetition.distributions import TruncatedGamma, TruncatedGaussian, Uniform
from coopetition.market import MarketParams, QualityProfile
from coopetition.scenario_io import Scenario, bundled, load_accuracy_fixture, load_scenario
from coopetition.settings import SolverSettings

UNIT = MarketParams(1.0, 1.0, 1.0, 0.0, 0.0)
STOCK = [Uniform(), TruncatedGaussian(), TruncatedGamma()]


def make_scenario(q_I1, q_local, q_fl, dist=None, params=UNIT, settings=None, **meta):
    return Scenario(params, dist or Uniform(), QualityProfile(q_I1, tuple(q_local), tuple(q_fl)),
                    settings or SolverSettings(), meta)


@pytest.fixture(scope="session")
def example():
    return load_scenario(bundled("two_firm_example.yaml"))


@pytest.fixture(scope="session")
def fixtures():
    return load_accuracy_fixture(bundled("accuracy_tables.csv"))


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
