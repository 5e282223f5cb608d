"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line with its runtime.
"""

import math
import time
from contextlib import contextmanager

import numpy as np

from cact.equilibrium2 import (
    enumerate_equilibria,
    expected_participation,
    is_equilibrium,
)
from cact.extensions import PolicymakerModel, informativeness_comparison
from cact.mixed_example import (
    BOUNDARY,
    p_tilde,
    two_player_maximal,
    two_player_thresholds,
)
from cact.outcomes import (
    conditional_success_given_turnout,
    success_probability,
    welfare,
)
from cact.population import (
    Environment,
    PopulationModel,
    ThresholdModel,
    pivotal_profile,
    poisson_nstar,
    poisson_pmf,
)
from cact.scenario import Profile
from cact.scenario_file import bundled, load_scenario
from cact.signal_info import SimilarityTransform, make_fc
from cact.simulate import SimConfig, run_trials
from cact.verify import check_sincere_voting, committee_pair, instance_rng, run_suite

from .oracles import two_player_oracle


@contextmanager
def criterion(capsys, number: int, title: str, budget: float | None = None):
    start = time.perf_counter()
    ok = False
    try:
        yield
        elapsed = time.perf_counter() - start
        if budget is not None:
            assert elapsed < budget, f"took {elapsed:.2f}s, budget {budget}s"
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} ({elapsed:.2f}s)")


def test_two_player_thresholds(capsys):
    with criterion(capsys, 1, "two-player thresholds q* = 0.8, q** = 0.4", budget=1):
        before = two_player_thresholds(0.6, p_tilde(1 / 3, 0.0))
        after = two_player_thresholds(0.6, p_tilde(1 / 3, 2 / 9))
        assert abs(before.q_star - 0.8) <= 1e-9
        assert abs(p_tilde(1 / 3, 2 / 9) - 1.0) <= 1e-9
        assert abs(after.q_double_star - 0.4) <= 1e-9


def test_three_signal_example(capsys):
    with criterion(capsys, 2, "three-signal example: {3} unique, transfer supports {2,3}, FC rejects it", budget=5):
        scn = load_scenario(bundled("three_signal"))
        assert np.allclose(scn.info.posteriors, [0.2941, 0.4615, 0.9000], atol=5e-5, rtol=0)
        assert abs(float(poisson_pmf(20, 15)) - 0.0418) <= 5e-4
        assert abs(float(poisson_pmf(20, 30)) - 0.0134) <= 5e-4
        rep = enumerate_equilibria(scn)
        assert [p for p in rep.equilibria if p != Profile(0, 0)] == [Profile(0b100, 0b100)]
        two_three = Profile(0b110, 0b110)
        assert is_equilibrium(scn.with_eti(SimilarityTransform((0, 1), 0.005)), two_three).ok
        fc = scn.with_info(scn.info.with_joint(1, make_fc(scn.info.marginal1)))
        assert not is_equilibrium(fc, two_three).ok


def test_policymaker_example(capsys):
    with criterion(capsys, 3, "policymaker threshold 28, broken after shift with a named witness", budget=5):
        raw = bundled("turnout_policymaker")
        jhat = load_scenario(raw)
        j = jhat.with_eti(SimilarityTransform((0, 1), 0.05))
        rep = informativeness_comparison(j, jhat, PolicymakerModel(raw["policymaker"]["belief_cutoff"]))
        assert rep.theta_star == 28
        assert not rep.after.ok
        witness = rep.after.violation
        assert witness is not None and jhat.info.space.labels[witness.signal] == 1


def test_encouragement_suite(capsys):
    with criterion(capsys, 4, "encouraging similarity never lowers participation (100 instances)", budget=60):
        rep = run_suite("thm1", 100, seed=0)
        assert rep.passed == 100 and rep.failed == 0 and rep.skipped == 0, rep.counterexamples


def test_discouragement_suite(capsys):
    with criterion(capsys, 5, "discouraging similarity never raises participation (100 instances)", budget=120):
        rep = run_suite("thm2", 100, seed=0)
        assert rep.failed == 0, rep.counterexamples
        assert rep.skipped == 0
        assert rep.strict >= 1


def test_order_equivalence(capsys):
    with criterion(capsys, 6, "subset order agrees with transfer decomposition (100 pairs)"):
        rep = run_suite("lemma-a3", 100, seed=0)
        assert rep.passed == 100, rep.counterexamples


def test_poisson_boundary(capsys):
    with criterion(capsys, 7, "environment flips at N/ln 2 for N in {5, 10, 15, 20}"):
        checks = 0
        for nbar in (5, 10, 15, 20):
            nstar = poisson_nstar(nbar)
            pop = PopulationModel.poisson(nbar)
            low = pivotal_profile(pop, ThresholdModel.deterministic(math.floor(nstar))).environment
            high = pivotal_profile(pop, ThresholdModel.deterministic(math.ceil(nstar))).environment
            assert low is Environment.DISCOURAGEMENT
            assert high is Environment.ENCOURAGEMENT
            checks += 2
        assert checks == 8


def _standing_scenarios():
    three = load_scenario(bundled("three_signal"))
    turnout = load_scenario(bundled("turnout_policymaker"))
    return [
        ("independent {3}", three, 0b100),
        ("transfer {2,3}", three.with_eti(SimilarityTransform((0, 1), 0.005)), 0b110),
        ("policymaker {1}", turnout, 0b10),
    ]


def test_monte_carlo_agreement(capsys):
    with criterion(capsys, 8, "Monte Carlo within 3 SE on the standing scenarios, bit-identical reruns"):
        for _, scn, P in _standing_scenarios():
            sigma = Profile(P, P)
            cfg = SimConfig(trials=100_000, seed=0)
            res = run_trials(scn, sigma, cfg)
            targets = [
                (res.s_hat, res.s_se, float(expected_participation(scn, sigma))),
                (res.pi_hat, res.pi_se, success_probability(scn, P)),
                (res.w_hat, res.w_se, welfare(scn, P)),
                (res.cond_hat, res.cond_se, conditional_success_given_turnout(scn, P)),
            ]
            for est, se, value in targets:
                assert abs(est - value) <= 3 * se, (est, se, value)
            assert run_trials(scn, sigma, cfg) == res


def test_region_map(capsys):
    with criterion(capsys, 9, "two-player region map matches the candidate oracle on 200x200 grids"):
        pts = (np.arange(200) + 0.5) / 200
        disagreements, compared = 0, 0
        for c in (0.55, 0.6, 0.75):
            for pt in pts:
                for q in pts:
                    out = two_player_maximal(float(q), c, float(pt))
                    if out.label == BOUNDARY or out.boundary:
                        continue
                    compared += 1
                    disagreements += out.label != two_player_oracle(float(q), c, float(pt))
        assert compared > 0.95 * 3 * 200 * 200
        assert disagreements == 0


def test_sincere_voting_survives_similarity(capsys):
    with criterion(capsys, 10, "sincere voting survives similarity below the threshold (200 pairs)"):
        for i in range(200):
            rng = instance_rng(0, i)
            hat, _, k_star = committee_pair(rng)
            assert hat.size in (3, 4, 5) and k_star < hat.theta_bar
            verdict = check_sincere_voting(0, i)
            assert verdict.ok, verdict.detail
