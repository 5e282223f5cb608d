import numpy as np
import pytest
from hypothesis import given, settings

from cact.errors import ModelNotSupported, UndefinedConditional
from cact.outcomes import (
    conditional_success_given_turnout,
    eti_success_shift,
    informativeness,
    max_success,
    max_welfare,
    most_informative_set,
    outcome_report,
    success_probability,
    welfare,
)
from cact.population import PopulationModel, poisson_cdf
from cact.scenario import Profile
from cact.signal_info import SimilarityTransform, make_fc
from cact.verify import random_similarity

from .oracles import success_oracle
from .strategies import scenarios, seeds


def test_success_and_welfare_at_independent_maximum(three):
    assert success_probability(three, 0b100) == pytest.approx(0.2364254652285915, rel=1e-10)
    assert welfare(three, 0b100) == pytest.approx(0.11596273261429575, rel=1e-10)
    assert conditional_success_given_turnout(three, 0b100) == pytest.approx(0.33896124047109893, rel=1e-10)


def test_success_after_transfer(three_shifted):
    assert success_probability(three_shifted, 0b110) == pytest.approx(0.5777603611887081, rel=1e-10)


def test_success_matches_direct_sum(three, three_shifted):
    for scn, P in ((three, {2}), (three_shifted, {1, 2})):
        mask = sum(1 << x for x in P)
        want = success_oracle(scn.info.joint1.tolist(), P, scn.nbar, scn.threshold.value)
        assert success_probability(scn, mask) == pytest.approx(want, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(scenarios, seeds)
def test_success_formula_against_direct_sum(scn, seed):
    P = int(np.random.default_rng(seed).integers(1 << scn.n))
    members = {x for x in range(scn.n) if P >> x & 1}
    want = success_oracle(scn.info.joint1.tolist(), members, scn.nbar, scn.threshold.value)
    assert success_probability(scn, P) == pytest.approx(want, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(scenarios, seeds)
def test_success_shift_from_crossing_transfer(scn, seed):
    rng = np.random.default_rng(seed)
    n = scn.n
    P = int(rng.integers(1, (1 << n) - 1))
    a = int(rng.choice([x for x in range(n) if P >> x & 1]))
    b = int(rng.choice([x for x in range(n) if not P >> x & 1]))
    alpha = float(rng.uniform(0, 1) * scn.info.joint1[a, b])
    shifted = scn.with_eti(SimilarityTransform((min(a, b), max(a, b)), alpha))
    got = success_probability(shifted, P) - success_probability(scn, P)
    assert got == pytest.approx(eti_success_shift(scn, alpha), abs=1e-12)
    one = 1 - poisson_cdf(scn.threshold.value, scn.nbar)
    two = 1 - poisson_cdf(scn.threshold.value, 2 * scn.nbar)
    assert np.sign(round(got, 14)) in (np.sign(round(alpha * (two - 2 * one), 14)), 0)


@settings(max_examples=100, deadline=None)
@given(scenarios, seeds)
def test_transfer_inside_or_outside_leaves_success(scn, seed):
    rng = np.random.default_rng(seed)
    j1, _ = random_similarity(rng, scn.info.joint1, 2)
    for P in (0, (1 << scn.n) - 1):
        shifted = scn.with_info(scn.info.with_joint(1, j1))
        assert success_probability(shifted, P) == pytest.approx(success_probability(scn, P), abs=1e-12)


def test_asymmetric_profile_needs_simulation(three):
    with pytest.raises(ModelNotSupported):
        success_probability(three, Profile(0b100, 0b110))


def test_non_poisson_needs_simulation(three):
    with pytest.raises(ModelNotSupported):
        success_probability(three.__class__(three.info, PopulationModel.deterministic(3), three.threshold, 0.01), 0b100)


def test_empty_set(three):
    assert success_probability(three, 0) == 0
    assert welfare(three, 0) == 0
    with pytest.raises(UndefinedConditional):
        conditional_success_given_turnout(three, 0)


def test_best_equilibria(three):
    assert max_success(three) == (0b100, pytest.approx(0.2364254652285915))
    assert max_welfare(three) == pytest.approx(0.11596273261429575)


def test_informativeness(turnout, three):
    assert most_informative_set(turnout) == 0b10
    assert informativeness(turnout, 0b10) == pytest.approx(0.51)
    assert most_informative_set(three) == 0b100
    assert informativeness(three, 0b100) == pytest.approx(0.40)
    assert informativeness(three, 0b110) == pytest.approx(0.35)


def test_outcome_report(three):
    rep = outcome_report(three, 0b100)
    assert rep.s == pytest.approx(13.5)
    assert rep.pi == pytest.approx(0.2364254652285915)


def test_full_correlation_success(three):
    fc = three.with_info(three.info.with_joint(1, make_fc(three.info.marginal1)))
    # with identical signals both groups show up together
    two = 1 - poisson_cdf(20, 30)
    assert success_probability(fc, 0b100) == pytest.approx(0.45 * two)
