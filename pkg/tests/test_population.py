import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cact.errors import NotADistribution, NotFOSDOrdered
from cact.population import (
    Assumption1Warning,
    Environment,
    PopulationModel,
    ThresholdModel,
    check_single_crossing,
    pivotal_profile,
    poisson_nstar,
    poisson_pmf,
    truncation_point,
)

from .oracles import pivotal_oracle


def test_poisson_values():
    assert poisson_pmf(20, 15) == pytest.approx(0.0418, abs=5e-4)
    assert poisson_pmf(20, 30) == pytest.approx(0.0134, abs=5e-4)


def test_poisson_pivotal_probabilities():
    prof = pivotal_profile(PopulationModel.poisson(15), ThresholdModel.deterministic(20))
    assert prof.lambda2 == pytest.approx(0.013411150012837837, rel=1e-12)
    assert prof.lambda1 == prof.lambda_o == pytest.approx(0.04181030500106466, rel=1e-12)
    assert prof.lambda_none == 0.0
    assert prof.environment is Environment.DISCOURAGEMENT


@pytest.mark.parametrize("nbar", [5, 10, 15, 20])
def test_environment_flips_at_nstar(nbar):
    nstar = poisson_nstar(nbar)
    below, above = math.floor(nstar), math.ceil(nstar)
    pop = PopulationModel.poisson(nbar)
    assert pivotal_profile(pop, ThresholdModel.deterministic(below)).environment is Environment.DISCOURAGEMENT
    assert pivotal_profile(pop, ThresholdModel.deterministic(above)).environment is Environment.ENCOURAGEMENT


@settings(max_examples=100, deadline=None)
@given(st.floats(1, 40), st.integers(0, 120))
def test_environment_sign_matches_ratio(nbar, theta):
    # psi(k, 2N) / psi(k, N) = 2**k exp(-N)
    prof = pivotal_profile(PopulationModel.poisson(nbar), ThresholdModel.deterministic(theta), warn=False)
    gap = theta * math.log(2) - nbar
    if abs(gap) > 1e-6:
        expected = Environment.ENCOURAGEMENT if gap > 0 else Environment.DISCOURAGEMENT
        if abs(prof.lambda2 - prof.lambda1) > 1e-9:
            assert prof.environment is expected


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_explicit_models_match_direct_sums(data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    outside = rng.dirichlet(np.ones(data.draw(st.integers(1, 8))))
    own = rng.dirichlet(np.ones(data.draw(st.integers(1, 8))))
    thr = rng.dirichlet(np.ones(data.draw(st.integers(1, 10))))
    prof = pivotal_profile(PopulationModel.explicit(outside, own), ThresholdModel.explicit(thr), warn=False)
    want = pivotal_oracle(outside, own, thr)
    got = (prof.lambda2, prof.lambda1, prof.lambda_o, prof.lambda_none)
    assert got == pytest.approx(want, abs=1e-12)


def test_deterministic_groups():
    prof = pivotal_profile(PopulationModel.deterministic(1), ThresholdModel.explicit([0.3, 0.7]), warn=False)
    # own group has nobody else, the other group has one member
    assert (prof.lambda2, prof.lambda1, prof.lambda_o, prof.lambda_none) == pytest.approx((0.7, 0.3, 0.7, 0.3))


def test_assumption_warning():
    # the other group is empty and one's own group has one other member
    pop = PopulationModel.explicit([1.0], [0.0, 1.0])
    with pytest.warns(Assumption1Warning):
        prof = pivotal_profile(pop, ThresholdModel.deterministic(0))
    assert prof.assumption1 is False
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert pivotal_profile(PopulationModel.poisson(5), ThresholdModel.deterministic(3)).assumption1


def test_truncation():
    k = truncation_point(15)
    assert 1 - sum(poisson_pmf(np.arange(k + 1), 15)) < 1e-11
    assert len(PopulationModel.poisson(15).outside_pmf) == k + 1


def test_bad_pmfs():
    with pytest.raises(NotADistribution):
        ThresholdModel.explicit([0.5, 0.4])
    with pytest.raises(ValueError):
        ThresholdModel.deterministic(-1)
    with pytest.raises(ValueError):
        PopulationModel.poisson(0)


def test_single_crossing_for_poisson():
    pop = PopulationModel.poisson(10)
    assert check_single_crossing(pop, [ThresholdModel.deterministic(k) for k in range(40)])
    with pytest.raises(NotFOSDOrdered):
        check_single_crossing(pop, [ThresholdModel.deterministic(5), ThresholdModel.deterministic(3)])
