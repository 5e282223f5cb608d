import pytest
from hypothesis import settings

from cact.scenario_file import bundled, load_scenario
from cact.signal_info import SimilarityTransform

settings.register_profile("repro", derandomize=True)
settings.load_profile("repro")


@pytest.fixture
def three():
    """Three signals, independent in both states, discouraging environment."""
    return load_scenario(bundled("three_signal"))


@pytest.fixture
def three_shifted(three):
    return three.with_eti(SimilarityTransform((0, 1), 0.005))


@pytest.fixture
def turnout():
    return load_scenario(bundled("turnout_policymaker"))
