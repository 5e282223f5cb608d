import math

import numpy as np
import pytest

from cact.equilibrium2 import expected_participation
from cact.mixed_example import MixedProfile
from cact.outcomes import (
    conditional_success_given_turnout,
    success_probability,
    welfare,
)
from cact.scenario import Profile
from cact.simulate import CHUNK, SimConfig, participation_probs, run_trials


def within(est, se, target, k=3.0):
    return abs(est - target) <= k * se


def test_empty_profile(three):
    res = run_trials(three, Profile(0, 0), SimConfig(trials=5000))
    assert res.s_hat == 0 and res.pi_hat == 0 and res.w_hat == 0
    assert math.isnan(res.cond_hat)


def test_same_seed_is_bit_identical(three):
    cfg = SimConfig(trials=2 * CHUNK + 17, seed=5)
    a = run_trials(three, Profile(0b100, 0b100), cfg)
    b = run_trials(three, Profile(0b100, 0b100), cfg)
    assert a == b
    assert run_trials(three, Profile(0b100, 0b100), SimConfig(trials=cfg.trials, seed=5, jobs=2)) == a
    assert run_trials(three, Profile(0b100, 0b100), SimConfig(trials=cfg.trials, seed=6)) != a


@pytest.mark.parametrize("state1", [True, False])
@pytest.mark.parametrize("case", ["ci", "shifted"])
def test_agrees_with_closed_forms(three, three_shifted, case, state1):
    scn, P = (three, 0b100) if case == "ci" else (three_shifted, 0b110)
    res = run_trials(scn, Profile(P, P), SimConfig(trials=100_000, seed=1, condition_on_state1=state1))
    assert within(res.s_hat, res.s_se, float(expected_participation(scn, Profile(P, P))))
    assert within(res.pi_hat, res.pi_se, success_probability(scn, P))
    assert within(res.w_hat, res.w_se, welfare(scn, P))
    assert within(res.cond_hat, res.cond_se, conditional_success_given_turnout(scn, P))


def test_standard_error_shrinks_like_root_n(three):
    sizes = [10_000, 40_000, 160_000]
    ses = [run_trials(three, Profile(0b100, 0b100), SimConfig(trials=t, seed=2)).s_se for t in sizes]
    slope = np.polyfit(np.log(sizes), np.log(ses), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.05)


def test_mixed_profile(three):
    sigma = MixedProfile(0b100, 0b001, 1, 0.4)
    probs = participation_probs(three, sigma)
    assert probs.tolist() == [[0.0, 0.4, 1.0]] * 2
    res = run_trials(three, sigma, SimConfig(trials=50_000, seed=3))
    m = three.info.marginal1
    assert within(res.s_hat, res.s_se, 2 * three.nbar * (m[2] + 0.4 * m[1]))


def test_profile_validation(three):
    with pytest.raises(ValueError):
        participation_probs(three, [[0.5, 1.5, 0.0], [0, 0, 0]])
    with pytest.raises(ValueError):
        SimConfig(trials=0)
    assert participation_probs(three, Profile(0b001, 0b110)).tolist() == [[1, 0, 0], [0, 1, 1]]
