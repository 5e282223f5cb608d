"""Variations on the two-group game.

* signed states: regime change is harmful (payoff -1) in the bad state;
* a policymaker who reads turnout and changes the regime only when convinced;
* searching the similarity of state-1 signals for the highest participation;
* signals that are posteriors, with marginals allowed to change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._bits import as_mask, members, membership_matrix
from .equilibrium2 import (
    ICCheck,
    enumerate_equilibria,
    expected_participation,
    is_equilibrium,
    net_gain,
)
from .errors import (
    AssumptionB2Failed,
    MarginalMismatch,
    ModelNotSupported,
    NotADistribution,
    NotCadComparable,
    NotExchangeable,
    PosteriorNotInjective,
    PremiseFailed,
)
from .outcomes import informativeness, most_informative_set
from .population import Environment, ThresholdModel, poisson_pmf, truncation_point
from .scenario import Profile, Scenario
from .signal_info import (
    InfoStructure,
    SignalSpace,
    SimilarityTransform,
    conditional_matrix,
    eti,
    is_cad_geq,
    make_ci,
    make_fc,
    mass,
)

TOL = 1e-9


# signed states


@dataclass(frozen=True, eq=False)
class SignedStateScenario:
    """A scenario whose state-0 joint is read as the harmful state.

    Posteriors are probabilities of the good state; regime change in the bad
    state costs every agent 1.
    """

    base: Scenario

    @property
    def info(self) -> InfoStructure:
        return self.base.info

    @property
    def n(self) -> int:
        return self.base.n

    def with_joint(self, state: int, joint) -> SignedStateScenario:
        return SignedStateScenario(self.base.with_info(self.info.with_joint(state, joint)))


def signed_gains(scn: SignedStateScenario, P) -> tuple[np.ndarray, np.ndarray]:
    """Net gains from participating and from deviating to participate, per signal,
    when both groups use the set P."""
    P = as_mask(P, scn.n)
    info = scn.info
    lam2, lam1, lam_o, lam_none = (float(v) for v in scn.base.lambdas)
    idx = list(members(P, scn.n))
    good = np.asarray(info.cond1, dtype=float)[:, idx].sum(axis=1)
    bad = np.asarray(info.cond0, dtype=float)[:, idx].sum(axis=1)
    mu = np.array([float(v) if info.observed[x] else 0.0 for x, v in enumerate(info.posteriors)])
    c = float(scn.base.cost)
    part = mu * (good * lam2 + (1 - good) * lam1) - (1 - mu) * (bad * lam2 + (1 - bad) * lam1) - c
    abst = mu * (good * lam_o + (1 - good) * lam_none) - (1 - mu) * (bad * lam_o + (1 - bad) * lam_none) - c
    return part, abst


def state_dependent_equilibrium(scn: SignedStateScenario, P, tol: float = TOL) -> bool:
    P = as_mask(P, scn.n)
    part, abst = signed_gains(scn, P)
    for x in range(scn.n):
        if not scn.info.observed[x]:
            continue
        if P >> x & 1:
            if part[x] < -tol:
                return False
        elif abst[x] > tol:
            return False
    return True


def signed_maximal(scn: SignedStateScenario) -> tuple[int, float]:
    """Symmetric equilibrium with the most state-1 participation."""
    best = (0, 0.0)
    for P in range(1 << scn.n):
        if state_dependent_equilibrium(scn, P):
            s = float(expected_participation(scn.base, Profile(P, P)))
            if s > best[1] + TOL:
                best = (P, s)
    return best


def assumption_b1(scn: SignedStateScenario, tol: float = TOL) -> bool:
    """Every symmetric profile with at least the maximal participation leaves no
    abstaining signal tempted to join on good-state grounds alone.

    The maximal profile itself is included: without it, bad-state similarity
    can tempt an abstaining signal to join and break the maximal equilibrium.
    """
    _, s_star = signed_maximal(scn)
    info = scn.info
    lam_o = float(scn.base.lambdas[2])
    cond = np.asarray(info.cond1, dtype=float)
    c = float(scn.base.cost)
    for P in range(1 << scn.n):
        if float(expected_participation(scn.base, Profile(P, P))) < s_star - tol:
            continue
        idx = list(members(P, scn.n))
        for x in range(scn.n):
            if P >> x & 1 or not info.observed[x]:
                continue
            if float(info.posteriors[x]) * cond[x, idx].sum() * lam_o >= c - tol:
                return False
    return True


# policymaker reading turnout


@dataclass(frozen=True)
class PolicymakerModel:
    """Changes the regime once her belief in the good state reaches ``belief_cutoff``."""

    belief_cutoff: float

    def __post_init__(self):
        if not 0 < self.belief_cutoff < 1:
            raise ValueError("belief cutoff must lie in (0, 1)")

    @property
    def odds_cutoff(self) -> float:
        return self.belief_cutoff / (1 - self.belief_cutoff)


def _as_pm(pm) -> PolicymakerModel:
    return pm if isinstance(pm, PolicymakerModel) else PolicymakerModel(float(pm))


def _require_poisson(scn: Scenario):
    if scn.population.kind != "poisson":
        raise ModelNotSupported("turnout beliefs need Poisson groups")


def turnout_likelihood(scn: Scenario, P, k: int, state: int) -> float:
    """Probability of turnout ``k`` in ``state`` when both groups use the set P."""
    _require_poisson(scn)
    n = scn.n
    P = as_mask(P, n)
    full = (1 << n) - 1
    j = scn.info.joint(state)
    both, single = float(mass(j, P, P)), float(mass(j, P, full ^ P))
    neither = float(mass(j, full ^ P, full ^ P))
    nbar = scn.nbar
    return both * float(poisson_pmf(k, 2 * nbar)) + 2 * single * float(poisson_pmf(k, nbar)) + neither * (k == 0)


def policymaker_odds(scn: Scenario, P, k: int) -> float:
    prior = float(scn.info.prior)
    num = turnout_likelihood(scn, P, k, 1)
    den = turnout_likelihood(scn, P, k, 0)
    if den == 0:
        return math.inf if num > 0 else math.nan
    return prior / (1 - prior) * num / den


def policymaker_belief(scn: Scenario, P, k: int) -> float:
    """Posterior probability of the good state after observing turnout ``k``."""
    odds = policymaker_odds(scn, P, k)
    if math.isinf(odds):
        return 1.0
    return odds / (1 + odds)


def _max_turnout(scn: Scenario) -> int:
    return truncation_point(2 * scn.nbar)


def policymaker_cutoff(scn: Scenario, P, pm: PolicymakerModel, kmax: int | None = None) -> int | None:
    """Smallest turnout at which the policymaker changes the regime."""
    pm = _as_pm(pm)
    kmax = _max_turnout(scn) if kmax is None else kmax
    for k in range(kmax + 1):
        if policymaker_belief(scn, P, k) >= pm.belief_cutoff:
            return k
    return None


def is_cutoff_rule(scn: Scenario, P, pm: PolicymakerModel, k_star: int, kmax: int | None = None) -> bool:
    """True iff acting exactly at turnouts ``>= k_star`` is the policymaker's best response."""
    pm = _as_pm(pm)
    kmax = _max_turnout(scn) if kmax is None else kmax
    return all((policymaker_belief(scn, P, k) >= pm.belief_cutoff) == (k >= k_star) for k in range(kmax + 1))


def aggregation_bounds(scn: Scenario) -> tuple[float, float]:
    """Limiting odds at the most informative set when state-1 signals are
    independent (low) and fully correlated (high)."""
    P = most_informative_set(scn)
    if P == 0:
        raise PremiseFailed("no signal is more likely in the good state")
    info = scn.info
    m1 = float(sum(info.marginal1[x] for x in members(P, scn.n)))
    m0 = float(sum(info.marginal0[x] for x in members(P, scn.n)))
    j0 = float(mass(info.joint0, P, P))
    if not m1 * m0 > j0:
        raise PremiseFailed("bad-state signals are too correlated on the most informative set")
    prior_odds = float(info.prior) / (1 - float(info.prior))
    return prior_odds * m1 ** 2 / j0, prior_odds * m1 / j0


class AggregationCertificate(NamedTuple):
    weight: float
    alpha: float
    cost: float
    k_star: int


class AggregationVerdict(NamedTuple):
    verdict: str
    l_low: float
    l_high: float
    certificate: AggregationCertificate | None


NO_AGGREGATION_ANY = "no_aggregation_for_any_similarity"
CI_FAILS_SIMILARITY_HELPS = "independent_fails_similar_succeeds"
CI_FAILS = "independent_fails"
INCONCLUSIVE = "inconclusive"


def cost_window(scn: Scenario, P) -> tuple[float, float]:
    """Costs for which (P, P) is an equilibrium, as ``(lowest, highest)``; empty if lowest > highest."""
    P = as_mask(P, scn.n)
    lo, hi = 0.0, math.inf
    zero = scn.with_cost(0.0)
    for x in range(scn.n):
        if not scn.info.observed[x]:
            continue
        g = float(net_gain(zero, 1, x, Profile(P, P)))
        if P >> x & 1:
            hi = min(hi, g)
        else:
            lo = max(lo, g)
    return lo, hi


def check_aggregation(scn: Scenario, pm: PolicymakerModel, grid: int = 200) -> AggregationVerdict:
    """Can some similarity of good-state signals let turnout reveal the state?

    Searches mixtures of independent and fully correlated signals for a
    threshold and cost that make the most informative set an equilibrium.
    """
    pm = _as_pm(pm)
    _require_poisson(scn)
    l_low, l_high = aggregation_bounds(scn)
    cut = pm.odds_cutoff
    if cut > l_high:
        return AggregationVerdict(NO_AGGREGATION_ANY, l_low, l_high, None)
    if cut < l_low:
        return AggregationVerdict(INCONCLUSIVE, l_low, l_high, None)
    P = most_informative_set(scn)
    m1 = scn.info.marginal1
    ci, fc = make_ci(m1), make_fc(m1)
    base_pp = float(mass(ci, P, P))
    for weight in np.linspace(0, 1, grid + 1)[1:]:
        trial = scn.with_info(scn.info.with_joint(1, (1 - weight) * ci + weight * fc))
        k_star = policymaker_cutoff(trial, P, pm)
        if k_star is None or not is_cutoff_rule(trial, P, pm, k_star):
            continue
        at = trial.with_threshold(ThresholdModel.deterministic(k_star))
        lo, hi = cost_window(at, P)
        if hi > 0 and lo <= hi:
            cost = (lo + hi) / 2 if lo > 0 else hi / 2
            alpha = float(mass(trial.info.joint1, P, P)) - base_pp
            cert = AggregationCertificate(float(weight), alpha, cost, k_star)
            return AggregationVerdict(CI_FAILS_SIMILARITY_HELPS, l_low, l_high, cert)
    return AggregationVerdict(CI_FAILS, l_low, l_high, None)


@dataclass(frozen=True)
class ConsistentEquilibrium:
    P: int
    threshold: int
    informativeness: float


def consistent_equilibria(scn: Scenario, pm: PolicymakerModel) -> list[ConsistentEquilibrium]:
    """Symmetric profiles that are equilibria at the threshold the policymaker
    would choose after seeing turnout generated by them."""
    pm = _as_pm(pm)
    out = []
    for P in range(1, 1 << scn.n):
        k_star = policymaker_cutoff(scn, P, pm)
        if k_star is None or not is_cutoff_rule(scn, P, pm, k_star):
            continue
        at = scn.with_threshold(ThresholdModel.deterministic(k_star))
        if is_equilibrium(at, Profile(P, P)):
            out.append(ConsistentEquilibrium(P, k_star, informativeness(scn, P)))
    return out


def max_informativeness(scn: Scenario, pm: PolicymakerModel) -> tuple[float, ConsistentEquilibrium | None]:
    eqs = consistent_equilibria(scn, pm)
    if not eqs:
        return 0.0, None
    best = max(eqs, key=lambda e: e.informativeness)
    return best.informativeness, best


@dataclass(frozen=True)
class InformativenessReport:
    P: int
    theta_star: int | None
    holds_before: bool
    after: ICCheck
    branch: str
    info_before: float
    info_after: float
    window_before: tuple[float, float] | None = None
    window_after: tuple[float, float] | None = None
    best_before: ConsistentEquilibrium | None = field(repr=False, default=None)
    best_after: ConsistentEquilibrium | None = field(repr=False, default=None)


def informativeness_comparison(j: Scenario, jhat: Scenario, pm: PolicymakerModel) -> InformativenessReport:
    """Compare turnout informativeness before (``jhat``) and after (``j``) a rise
    in good-state similarity.

    The policymaker's threshold under ``jhat`` at the most informative set is
    kept fixed and the set's equilibrium status re-checked under ``j``; the
    full policymaker-consistent problem is then re-solved on both sides.
    """
    pm = _as_pm(pm)
    _require_poisson(j)
    if np.abs(np.asarray(j.info.joint0, float) - np.asarray(jhat.info.joint0, float)).max() > TOL:
        raise NotCadComparable("bad-state signals must be unchanged")
    if not is_cad_geq(j.info.joint1, jhat.info.joint1):
        raise NotCadComparable("good-state signals are not more similar")
    P = most_informative_set(jhat)
    theta = policymaker_cutoff(jhat, P, pm)
    windows = (None, None)
    if theta is None:
        holds, after, branch = False, ICCheck(False), "no_cutoff"
    else:
        thr = ThresholdModel.deterministic(theta)
        sigma = Profile(P, P)
        holds = is_equilibrium(jhat.with_threshold(thr), sigma).ok
        after = is_equilibrium(j.with_threshold(thr), sigma)
        windows = (cost_window(jhat.with_threshold(thr), P), cost_window(j.with_threshold(thr), P))
        psi2 = float(poisson_pmf(theta, 2 * j.nbar))
        psi1 = float(poisson_pmf(theta, j.nbar))
        if psi2 > 2 * psi1:
            branch = "preserved_if_small"
        elif psi2 < psi1:
            branch = "possibly_lower"
        else:
            branch = "undetermined"
    before_val, before = max_informativeness(jhat, pm)
    after_val, after_best = max_informativeness(j, pm)
    return InformativenessReport(P, theta, holds, after, branch, before_val, after_val, *windows, before, after_best)


# searching similarity


@dataclass(frozen=True)
class SearchResult:
    masses: np.ndarray
    joint1: np.ndarray
    s_star: float
    profile: Profile
    evaluations: int

    def alpha_table(self) -> dict[tuple[int, int], float]:
        n = len(self.masses)
        return {(i, k): float(self.masses[i, k]) for i in range(n) for k in range(i + 1, n) if self.masses[i, k] > 0}


def _joint_from_masses(ci: np.ndarray, masses: np.ndarray) -> np.ndarray:
    out = ci.copy()
    n = len(ci)
    for i in range(n):
        for k in range(i + 1, n):
            a = masses[i, k]
            if a > 0:
                out = eti(out, SimilarityTransform((i, k), float(a)))
    return out


def optimal_info_search(scn: Scenario, step: float = 0.001, restarts: int = 10, seed: int = 0,
                        max_sweeps: int = 20) -> SearchResult:
    """Coordinate ascent over pairwise transfers away from independence.

    Every candidate is independent state-1 signals plus a nonnegative transfer
    on each signal pair, so it is at least as similar as independence and has
    the same marginals.  Independence and full correlation are always tried
    first (in the order suggested by the environment); a later candidate
    replaces the incumbent only when strictly better.  This is a local search:
    global optimality is not claimed.
    """
    info = scn.info
    n = scn.n
    m = np.asarray(info.marginal1, dtype=float)
    ci = make_ci(m)
    caps = np.triu(np.outer(m, m), 1)
    pairs = [(i, k) for i in range(n) for k in range(i + 1, n)]
    evals = 0

    def value(masses):
        nonlocal evals
        evals += 1
        s = scn.with_info(info.with_joint(1, _joint_from_masses(ci, masses)))
        rep = enumerate_equilibria(s)
        return float(rep.s_star), rep.canonical

    def ascend(masses):
        best_val, best_prof = value(masses)
        for _ in range(max_sweeps):
            improved = False
            for i, k in pairs:
                grid = np.append(np.arange(0.0, caps[i, k], step), caps[i, k])
                for a in grid:
                    trial = masses.copy()
                    trial[i, k] = a
                    v, prof = value(trial)
                    if v > best_val + TOL:
                        best_val, best_prof, masses, improved = v, prof, trial, True
            if not improved:
                break
        return masses, best_val, best_prof

    starts = [np.zeros((n, n)), caps.copy()]
    if scn.pivotal.environment is Environment.ENCOURAGEMENT:
        starts.reverse()
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        starts.append(np.round(rng.uniform(0, 1, (n, n)) * caps / step) * step)

    best = None
    for start in starts:
        masses, val, prof = ascend(np.minimum(start, caps))
        if best is None or val > best[1] + TOL:
            best = (masses, val, prof)
    masses, val, prof = best
    return SearchResult(masses, _joint_from_masses(ci, masses), val, prof, evals)


# signals that are posteriors


@dataclass(frozen=True, eq=False)
class PosteriorInfo:
    """Signals labelled by the posterior they induce; only state-1 signals are modelled.

    Exposes the attributes the equilibrium engine reads, so it can stand in for
    an :class:`InfoStructure` inside a :class:`Scenario`.
    """

    values: np.ndarray
    joint1: np.ndarray
    prior: float = 0.5

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        j = np.asarray(self.joint1, dtype=float)
        if len(set(v.tolist())) != len(v):
            raise PosteriorNotInjective("posterior labels must be distinct")
        if ((v < 0) | (v > 1)).any():
            raise NotADistribution("posteriors must lie in [0, 1]")
        if j.shape != (len(v), len(v)) or (j < -1e-12).any() or abs(j.sum() - 1) > 1e-12:
            raise NotADistribution("joint1 is not a distribution over signal pairs")
        if np.abs(j - j.T).max() > 1e-12:
            raise NotExchangeable("joint1 is not symmetric")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "joint1", (j + j.T) / 2)

    exact = False

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def posteriors(self) -> np.ndarray:
        return self.values

    @property
    def marginal1(self) -> np.ndarray:
        return self.joint1.sum(axis=1)

    @property
    def observed(self) -> np.ndarray:
        return self.marginal1 > 0

    @property
    def cond1(self) -> np.ndarray:
        return conditional_matrix(self.joint1)

    @property
    def space(self) -> SignalSpace:
        return SignalSpace(tuple(self.values.tolist()))

    def order_by_posterior(self) -> list[int]:
        return [int(x) for x in np.argsort(self.values) if self.observed[x]]

    def with_joint(self, state: int, joint) -> PosteriorInfo:
        if state != 1:
            raise ValueError("only state-1 signals are modelled")
        return PosteriorInfo(self.values, joint, self.prior)


def _cdf_points(dist) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(dist, dict):
        items = sorted(dist.items())
    else:
        items = sorted((float(v), float(p)) for v, p in dist)
    vals = np.array([v for v, _ in items])
    probs = np.array([p for _, p in items])
    if abs(probs.sum() - 1) > 1e-9 or (probs < 0).any():
        raise NotADistribution("spread comparison needs distributions")
    return vals, probs


def _cdf(vals, probs, z):
    return probs[vals <= z + 1e-15].sum()


def spread_out_geq(m, mhat, y: float, tol: float = TOL) -> bool:
    """True iff ``m`` is more spread out around ``y`` than ``mhat``.

    Both arguments are distributions over real values, given as ``{value: prob}``
    or ``[(value, prob), ...]``.  The cdf of ``m`` must lie weakly above that of
    ``mhat`` up to ``y`` and weakly below from ``y`` on.
    """
    v, p = _cdf_points(m)
    vh, ph = _cdf_points(mhat)
    for z in sorted(set(v.tolist()) | set(vh.tolist()) | {float(y)}):
        a, b = _cdf(v, p, z), _cdf(vh, ph, z)
        if z <= y and a < b - tol:
            return False
        if z >= y and a > b + tol:
            return False
    return True


def posterior_distribution(info: PosteriorInfo) -> dict[float, float]:
    return {float(v): float(p) for v, p in zip(info.values, info.marginal1)}


def assumption_b2(info: PosteriorInfo, tol: float = TOL) -> bool:
    """Chance the other group's posterior is at least y rises with own posterior,
    for own posteriors at or above y."""
    order = np.argsort(info.values)
    vals = info.values[order]
    cond = info.cond1[np.ix_(order, order)]
    obs = info.observed[order]
    upper = np.cumsum(cond[:, ::-1], axis=1)[:, ::-1]
    n = len(vals)
    for y in range(n):
        for lo in range(y, n):
            for hi in range(lo + 1, n):
                if obs[lo] and obs[hi] and upper[hi, y] < upper[lo, y] - tol:
                    return False
    return True


class CutoffResult(NamedTuple):
    P: int
    s_star: float
    is_upper_set: bool


def _upper_sets(info) -> list[int]:
    order = info.order_by_posterior()
    return [as_mask(order[i:], info.n) for i in range(len(order) + 1)]


def cutoff_maximal(scn: Scenario) -> CutoffResult:
    """Maximal equilibrium of a posterior-signal scenario, checked to be an upper set."""
    if not isinstance(scn.info, PosteriorInfo):
        raise ModelNotSupported("cutoff structure is defined for posterior-labelled signals")
    if scn.pivotal.environment is not Environment.ENCOURAGEMENT:
        raise PremiseFailed("cutoff structure needs an encouraging environment")
    if not assumption_b2(scn.info):
        raise AssumptionB2Failed("upper-set conditional mass is not monotone in own posterior")
    rep = enumerate_equilibria(scn)
    uppers = set(_upper_sets(scn.info))
    sym = [p for p in rep.maximal if p.is_symmetric and p.p1 in uppers]
    if sym:
        return CutoffResult(sym[0].p1, float(rep.s_star), True)
    return CutoffResult(rep.canonical.p1, float(rep.s_star), False)


def relaxed_cad_geq(j, jhat, tol: float = TOL) -> bool:
    """Conditional-mass part of the CAD order, without requiring equal marginals."""
    j, jhat = np.asarray(j, float), np.asarray(jhat, float)
    n = len(j)
    M = membership_matrix(n)
    rows = [y for y in range(n) if j[y].sum() > tol and jhat[y].sum() > tol]
    gap = (conditional_matrix(j)[rows] - conditional_matrix(jhat)[rows]) @ M
    inside = M[rows].astype(bool)
    return bool(np.where(inside, gap >= -tol, gap <= tol).all())


class CompareVerdict(NamedTuple):
    premises: bool
    pivot: float | None
    s_after: float
    s_before: float

    @property
    def holds(self) -> bool:
        return self.s_after >= self.s_before - TOL


def changing_marginal_compare(j: Scenario, jhat: Scenario) -> CompareVerdict:
    """Participation comparison when similarity and marginals change together.

    Premises: encouraging environment, the relaxed similarity order, and the
    posterior distribution under ``j`` more spread out than under ``jhat``
    around some point no higher than the cost.
    """
    for s in (j, jhat):
        if not isinstance(s.info, PosteriorInfo):
            raise ModelNotSupported("changing-marginal comparison needs posterior-labelled signals")
    if not np.array_equal(j.info.values, jhat.info.values):
        raise MarginalMismatch("both structures must use the same posterior labels")
    pivot = None
    ok = (j.pivotal.environment is Environment.ENCOURAGEMENT
          and relaxed_cad_geq(j.info.joint1, jhat.info.joint1))
    if ok:
        dist, dist_hat = posterior_distribution(j.info), posterior_distribution(jhat.info)
        cost = float(j.cost)
        candidates = sorted({v for v in j.info.values.tolist() if v <= cost} | {cost})
        pivot = next((y for y in candidates if spread_out_geq(dist, dist_hat, y)), None)
        ok = pivot is not None
    s_after = float(enumerate_equilibria(j).s_star)
    s_before = float(enumerate_equilibria(jhat).s_star)
    return CompareVerdict(ok, pivot, s_after, s_before)
