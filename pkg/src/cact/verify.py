"""Randomized checks of the comparative statics on generated instances.

Instances are drawn as follows: signal count uniform in {2, ..., 5}, prior
uniform in [0.2, 0.8], marginals from a flat Dirichlet, state-0 signals
independent, state-1 signals independent plus random pairwise similarity
transfers, Poisson mean uniform in [5, 25], threshold uniform in {3, ..., 45},
cost log-uniform in [1e-4, 0.5].  Instance ``i`` of a run with seed ``s`` uses
its own generator seeded by ``(s, i)``, so verdicts do not depend on ordering
or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .committee import (
    CommitteeModel,
    cad_sign_change,
    gamma_from_counts,
    is_sigma1_equilibrium,
    optimal_threshold,
)
from .equilibrium2 import check_condition_m, enumerate_equilibria, is_equilibrium
from .errors import CactError, UnknownName
from .extensions import optimal_info_search
from .multigroup import (
    MultiGroupScenario,
    condition_m_G,
    is_symmetric_equilibrium_G,
    make_ci_G,
    maximal_symmetric_G,
    meyer_geq,
    meyer_transfer,
    regime,
)
from .outcomes import eti_success_shift, success_probability
from .population import Environment, PopulationModel, ThresholdModel
from .scenario import Scenario
from .scenario_file import scenario_to_json
from .signal_info import (
    SimilarityTransform,
    build_info_structure,
    cad_decompose,
    eti,
    is_cad_geq,
    make_ci,
    make_fc,
)

TOL = 1e-9
MAX_DRAWS = 10_000
# discouraging draws tried per instance before it is skipped for failing the expansion condition
EXPANSION_DRAWS = 50

SUITES = ("thm1", "thm2", "lemma-a3", "prop-success", "prop-voting", "prop-b1-groups", "prop-b4")


def instance_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def random_similarity(rng, joint, steps: int) -> tuple[np.ndarray, list[SimilarityTransform]]:
    """Apply ``steps`` random pairwise transfers, each moving a random share of the cell."""
    n = len(joint)
    moves = []
    for _ in range(steps):
        i, k = sorted(rng.choice(n, size=2, replace=False).tolist())
        t = SimilarityTransform((i, k), float(rng.uniform(0, 1) * joint[i, k]))
        joint = eti(joint, t)
        moves.append(t)
    return joint, moves


def random_scenario(rng, n: int | None = None, max_signals: int = 5) -> Scenario:
    n = int(rng.integers(2, max_signals + 1)) if n is None else n
    m1, m0 = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
    j1, _ = random_similarity(rng, make_ci(m1), int(rng.integers(0, n + 1)))
    info = build_info_structure(float(rng.uniform(0.2, 0.8)), make_ci(m0), j1)
    nbar = float(rng.uniform(5, 25))
    theta = int(rng.integers(3, 46))
    cost = float(math.exp(rng.uniform(math.log(1e-4), math.log(0.5))))
    return Scenario(info, PopulationModel.poisson(nbar), ThresholdModel.deterministic(theta), cost)


def scenario_in(rng, env: Environment, accept=None, max_signals: int = 5) -> Scenario:
    for _ in range(MAX_DRAWS):
        try:
            scn = random_scenario(rng, max_signals=max_signals)
        except CactError:
            continue
        if scn.pivotal.environment is env and (accept is None or accept(scn)):
            return scn
    raise RuntimeError(f"no {env.value} instance found in {MAX_DRAWS} draws")


@dataclass
class Verdict:
    ok: bool
    skipped: bool = False
    strict: bool = False
    detail: dict = field(default_factory=dict)


def _moves_json(moves) -> list[dict]:
    return [{"pair": list(t.pair), "mass": t.mass, "state": t.state} for t in moves]


def check_encouragement(seed: int, i: int) -> Verdict:
    """Encouragement: similarity never lowers maximal participation, and the
    old maximal profile stays an equilibrium."""
    rng = instance_rng(seed, i)
    scn = scenario_in(rng, Environment.ENCOURAGEMENT)
    before = enumerate_equilibria(scn)
    j1, moves = random_similarity(rng, scn.info.joint1, int(rng.integers(1, 4)))
    after_scn = scn.with_info(scn.info.with_joint(1, j1))
    after = enumerate_equilibria(after_scn)
    kept = is_equilibrium(after_scn, before.canonical).ok
    ok = after.s_star >= before.s_star - TOL and kept
    detail = {} if ok else {"scenario": scenario_to_json(scn), "eti": _moves_json(moves),
                            "s_before": float(before.s_star), "s_after": float(after.s_star), "kept": kept}
    return Verdict(ok, strict=after.s_star > before.s_star + TOL, detail=detail)


def check_discouragement(seed: int, i: int) -> Verdict:
    """Discouragement with the no-profitable-expansion condition: similarity
    never raises maximal participation."""
    rng = instance_rng(seed, i)
    for _ in range(EXPANSION_DRAWS):
        scn = scenario_in(rng, Environment.DISCOURAGEMENT)
        if check_condition_m(scn).holds:
            break
    else:
        return Verdict(True, skipped=True)
    before = enumerate_equilibria(scn)
    j1, moves = random_similarity(rng, scn.info.joint1, int(rng.integers(1, 4)))
    after = enumerate_equilibria(scn.with_info(scn.info.with_joint(1, j1)))
    ok = after.s_star <= before.s_star + TOL
    detail = {"s_before": float(before.s_star), "s_after": float(after.s_star)}
    if not ok:
        detail.update(scenario=scenario_to_json(scn), eti=_moves_json(moves))
    return Verdict(ok, strict=after.s_star < before.s_star - TOL, detail=detail)


def check_order_equivalence(seed: int, i: int) -> Verdict:
    """Subset characterisation of the similarity order agrees with the
    pairwise-transfer decomposition."""
    rng = instance_rng(seed, i)
    n = int(rng.integers(2, 6))
    m = rng.dirichlet(np.ones(n))
    jhat, _ = random_similarity(rng, make_ci(m), int(rng.integers(0, n + 1)))
    if rng.random() < 0.5:
        j, _ = random_similarity(rng, jhat, int(rng.integers(1, n + 1)))
    else:
        j, _ = random_similarity(rng, make_ci(m), int(rng.integers(0, n + 1)))
    if rng.random() < 0.25:
        j, jhat = jhat, j
    by_subsets = is_cad_geq(j, jhat)
    by_transfers = cad_decompose(j, jhat) is not None
    ok = by_subsets == by_transfers
    detail = {"subsets": by_subsets, "transfers": by_transfers}
    if not ok:
        detail.update(j=j.tolist(), jhat=jhat.tolist())
    return Verdict(ok, strict=by_subsets, detail=detail)


def check_success_shift(seed: int, i: int) -> Verdict:
    """A transfer across the boundary of P changes success by the closed-form shift."""
    rng = instance_rng(seed, i)
    scn = random_scenario(rng)
    n = scn.n
    P = int(rng.integers(1, (1 << n) - 1))
    inside = [x for x in range(n) if P >> x & 1]
    outside = [x for x in range(n) if not P >> x & 1]
    a, b = int(rng.choice(inside)), int(rng.choice(outside))
    alpha = float(rng.uniform(0, 1) * scn.info.joint1[a, b])
    shifted = scn.with_eti(SimilarityTransform((min(a, b), max(a, b)), alpha))
    got = success_probability(shifted, P) - success_probability(scn, P)
    want = eti_success_shift(scn, alpha)
    ok = abs(got - want) <= 1e-9
    return Verdict(ok, detail={} if ok else {"scenario": scenario_to_json(scn), "P": P,
                                             "alpha": alpha, "got": got, "want": want})


def _mean_preserving_spread(rng, pmf: np.ndarray) -> np.ndarray:
    out = pmf.copy()
    G = len(pmf) - 1
    for _ in range(int(rng.integers(1, 4))):
        k = int(rng.integers(1, G))
        eps = rng.uniform(0, 1) * out[k] / 2
        out[k] -= 2 * eps
        out[k - 1] += eps
        out[k + 1] += eps
    return out


def committee_pair(rng) -> tuple[CommitteeModel, CommitteeModel, int]:
    """A committee, a more similar one with the same marginals, and their sign-change index.

    The threshold lies above the sign change and the cost is drawn so that
    sincere voting is an equilibrium of the less similar committee.
    """
    for _ in range(MAX_DRAWS):
        G = int(rng.integers(3, 6))
        base = rng.dirichlet(np.ones(G + 1))
        spread = _mean_preserving_spread(rng, base)
        change = cad_sign_change(gamma_from_counts(spread), gamma_from_counts(base))
        if change is None or change.equal or change.k_star >= G - 2:
            continue
        theta = int(rng.integers(change.k_star + 1, G))
        probe = CommitteeModel(G, base, 0.5, float(rng.uniform(0.05, 0.5)), 1.0, theta_bar=theta)
        low, high = probe.posterior(0), probe.posterior(1) * gamma_from_counts(base)[theta]
        if high <= low:
            continue
        cost = float(rng.uniform(low, high))
        if cost <= low:
            continue
        hat = replace(probe, cost=cost)
        return hat, hat.with_count_pmf(spread), change.k_star
    raise RuntimeError(f"no committee pair found in {MAX_DRAWS} draws")


def check_sincere_voting(seed: int, i: int) -> Verdict:
    """Sincere voting survives similarity whose sign change lies below the
    threshold, and the lowest workable threshold does not rise."""
    rng = instance_rng(seed, i)
    hat, new, k_star = committee_pair(rng)
    kept = is_sigma1_equilibrium(new) if is_sigma1_equilibrium(hat) else True
    t_hat, t_new = optimal_threshold(hat), optimal_threshold(new)
    ordered = True
    if t_hat is not None and k_star < t_hat:
        ordered = t_new is not None and t_new <= t_hat
    ok = kept and ordered
    detail = {} if ok else {"before": hat.to_json(), "after": new.to_json(), "k_star": k_star,
                            "threshold_before": t_hat, "threshold_after": t_new}
    return Verdict(ok, detail=detail)


def random_multigroup(rng) -> MultiGroupScenario:
    G = int(rng.integers(3, 5))
    n = int(rng.integers(2, 4))
    m1, m0 = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
    nbar = float(rng.uniform(5, 15))
    theta = int(rng.integers(3, int(G * nbar) + 10))
    cost = float(math.exp(rng.uniform(math.log(1e-4), math.log(0.3))))
    return MultiGroupScenario(make_ci_G(m1, G), m0, float(rng.uniform(0.2, 0.8)), nbar, theta, cost)


def check_multigroup(seed: int, i: int) -> Verdict:
    """With more than two groups, Meyer-order similarity raises symmetric maximal
    participation when encouraging and lowers it when discouraging under the
    expansion condition."""
    rng = instance_rng(seed, i)
    for _ in range(MAX_DRAWS):
        scn = random_multigroup(rng)
        direction = regime(scn)
        if direction in ("encouragement", "discouragement"):
            break
    else:
        raise RuntimeError("no multigroup instance with a definite regime")
    if direction == "discouragement" and not condition_m_G(scn):
        return Verdict(True, skipped=True)
    x = int(rng.integers(scn.n))
    profile = tuple([x] * (scn.G - 1) + [int(rng.integers(scn.n))])
    if len(set(profile)) == 1:
        profile = profile[:-1] + ((x + 1) % scn.n,)
    try:
        joint = meyer_transfer(scn.joint1, profile, float(rng.uniform(0.05, 1)))
    except CactError:
        return Verdict(True, skipped=True)
    after = scn.with_joint(joint)
    if not meyer_geq(after.joint1, scn.joint1):
        return Verdict(True, skipped=True)
    (p0, s0), (_, s1) = maximal_symmetric_G(scn), maximal_symmetric_G(after)
    if direction == "encouragement":
        ok = s1 >= s0 - TOL and is_symmetric_equilibrium_G(after, p0)
    else:
        ok = s1 <= s0 + TOL
    detail = {"regime": direction, "s_before": s0, "s_after": s1}
    return Verdict(ok, strict=abs(s1 - s0) > TOL, detail=detail)


def check_search_optimum(seed: int, i: int, step: float = 0.01, restarts: int = 1) -> Verdict:
    """The similarity search never beats full correlation when encouraging,
    nor independence when discouraging under the expansion condition."""
    rng = instance_rng(seed, i)
    env = Environment.ENCOURAGEMENT if i % 2 == 0 else Environment.DISCOURAGEMENT
    scn = scenario_in(rng, env, max_signals=3)
    m1 = scn.info.marginal1
    ci = scn.with_info(scn.info.with_joint(1, make_ci(m1)))
    if env is Environment.ENCOURAGEMENT:
        bench = enumerate_equilibria(scn.with_info(scn.info.with_joint(1, make_fc(m1)))).s_star
    else:
        if not check_condition_m(ci).holds:
            return Verdict(True, skipped=True)
        bench = enumerate_equilibria(ci).s_star
    found = optimal_info_search(ci, step=step, restarts=restarts, seed=seed + i)
    ok = found.s_star <= bench + TOL and is_cad_geq(found.joint1, make_ci(m1))
    detail = {"environment": env.value, "benchmark": float(bench), "found": found.s_star}
    if not ok:
        detail["scenario"] = scenario_to_json(scn)
    return Verdict(ok, detail=detail)


CHECKS = {
    "thm1": check_encouragement,
    "thm2": check_discouragement,
    "lemma-a3": check_order_equivalence,
    "prop-success": check_success_shift,
    "prop-voting": check_sincere_voting,
    "prop-b1-groups": check_multigroup,
    "prop-b4": check_search_optimum,
}


@dataclass
class SuiteReport:
    suite: str
    seed: int
    instances: int
    passed: int
    failed: int
    skipped: int
    strict: int
    counterexamples: list[dict]

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_json(self) -> dict:
        return {**self.__dict__, "ok": self.ok}


def _run_one(args) -> Verdict:
    suite, seed, i = args
    return CHECKS[suite](seed, i)


def run_suite(suite: str, instances: int = 100, seed: int = 0, jobs: int = 1) -> SuiteReport:
    if suite not in CHECKS:
        raise UnknownName(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    work = [(suite, seed, i) for i in range(instances)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            verdicts = list(pool.map(_run_one, work))
    else:
        verdicts = [_run_one(w) for w in work]
    skipped = sum(v.skipped for v in verdicts)
    failed = [dict(v.detail, instance=i) for i, v in enumerate(verdicts) if not v.ok]
    return SuiteReport(
        suite, seed, instances,
        passed=instances - skipped - len(failed),
        failed=len(failed),
        skipped=skipped,
        strict=sum(v.strict for v in verdicts if v.ok and not v.skipped),
        counterexamples=failed,
    )
