"""Pure-strategy equilibria of the two-group participation game.

The engine tabulates, for every signal x and every candidate participation set
S of the *other* group, the net gain from participating (x in own set) and from
abstaining (x outside own set).  A profile is an equilibrium when every signal
of both groups passes the relevant test.  All pairs of subsets are then checked
at once with numpy broadcasting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from ._bits import as_mask, members, membership_matrix
from .errors import ModelNotSupported, SizeCapExceeded, ZeroMassSignal
from .scenario import Profile, Scenario

ENUMERATION_CAP = 8


class Violation(NamedTuple):
    group: int
    signal: int
    constraint: str
    gain: float


@dataclass(frozen=True)
class ICCheck:
    ok: bool
    violation: Violation | None = None

    def __bool__(self) -> bool:
        return self.ok


def _posteriors(scn: Scenario) -> np.ndarray:
    info = scn.info
    mu = info.posteriors.copy()
    zero = Fraction(0) if info.exact else 0.0
    for x in range(info.n):
        if not info.observed[x]:
            mu[x] = zero
    return mu


def net_gain(scn: Scenario, g: int, x: int, sigma: Profile) -> float:
    """Expected gain of a group-``g`` agent with signal ``x`` from her prescribed action.

    Participating signals return the gain from participating; abstaining signals
    return the gain from deviating to participation.  Equilibrium requires the
    former to be nonnegative and the latter nonpositive.
    """
    info = scn.info
    if not info.observed[x]:
        raise ZeroMassSignal(f"signal {info.space.labels[x]!r} has zero mass in both states")
    lam2, lam1, lam_o, lam_none = scn.lambdas
    mu = info.posteriors[x]
    other = members(sigma.other(g), info.n)
    share = info.cond1[x, list(other)].sum() if other else 0
    if sigma.group(g) >> x & 1:
        return mu * (share * lam2 + (1 - share) * lam1) - scn.cost
    return mu * (share * lam_o + (1 - share) * lam_none) - scn.cost


def is_equilibrium(scn: Scenario, sigma: Profile) -> ICCheck:
    """Check both incentive constraints at every signal of both groups."""
    tol = scn.tol
    for g in (1, 2):
        for x in range(scn.n):
            if not scn.info.observed[x]:
                continue
            gain = net_gain(scn, g, x, sigma)
            if sigma.group(g) >> x & 1:
                if gain < -tol:
                    return ICCheck(False, Violation(g, x, "IC:P", gain))
            elif gain > tol:
                return ICCheck(False, Violation(g, x, "IC:NP", gain))
    return ICCheck(True)


@dataclass(frozen=True)
class GainTables:
    """``participate[x, S]`` and ``abstain[x, S]``: net gains given the other group's set S."""

    participate: np.ndarray
    abstain: np.ndarray
    observed: np.ndarray
    tol: float

    @property
    def ok_p(self) -> np.ndarray:
        return (self.participate >= -self.tol) | ~self.observed[:, None]

    @property
    def ok_np(self) -> np.ndarray:
        return (self.abstain <= self.tol) | ~self.observed[:, None]

    @property
    def fails_p(self) -> np.ndarray:
        return (self.participate < -self.tol) & self.observed[:, None]

    @property
    def fails_np(self) -> np.ndarray:
        return (self.abstain > self.tol) & self.observed[:, None]


def _check_cap(n: int, cap: int):
    if n > cap:
        raise SizeCapExceeded(f"exhaustive search is capped at {cap} signals (got {n})")


def gain_tables(scn: Scenario) -> GainTables:
    info = scn.info
    lam2, lam1, lam_o, lam_none = scn.lambdas
    M = membership_matrix(info.n)
    if info.exact:
        M = M.astype(object)
    share = info.cond1 @ M
    mu = _posteriors(scn)[:, None]
    part = mu * (share * lam2 + (1 - share) * lam1) - scn.cost
    abst = mu * (share * lam_o + (1 - share) * lam_none) - scn.cost
    return GainTables(part, abst, np.asarray(info.observed, dtype=bool), scn.tol)


def best_response_matrix(tables: GainTables) -> np.ndarray:
    """``ok[own, other]``: own participation set is a best response to the other's."""
    n = tables.participate.shape[0]
    own = membership_matrix(n).T.astype(bool)
    ok_p, ok_np = tables.ok_p.T, tables.ok_np.T
    return np.where(own[:, None, :], ok_p[None, :, :], ok_np[None, :, :]).all(axis=2)


def subset_marginals(scn: Scenario) -> np.ndarray:
    """State-1 marginal probability of every subset, indexed by bitmask."""
    M = membership_matrix(scn.n)
    if scn.info.exact:
        M = M.astype(object)
    return scn.info.marginal1 @ M


def participation_table(scn: Scenario) -> np.ndarray:
    """``S[p1, p2]``: expected state-1 participation for every profile."""
    mk = subset_marginals(scn)
    return scn.nbar * (mk[:, None] + mk[None, :])


def expected_participation(scn: Scenario, sigma: Profile) -> float:
    m = scn.info.marginal1
    total = sum(m[x] for x in members(sigma.p1, scn.n)) + sum(m[x] for x in members(sigma.p2, scn.n))
    return scn.nbar * total


@dataclass(frozen=True)
class EquilibriumReport:
    equilibria: list[Profile]
    maximal: list[Profile]
    s_star: float

    @property
    def canonical(self) -> Profile:
        return min(self.maximal)

    def to_json(self, scn: Scenario) -> dict:
        space = scn.info.space

        def enc(p: Profile) -> dict:
            return {"P1": space.subset_labels(p.p1), "P2": space.subset_labels(p.p2)}

        return {
            "equilibria": [enc(p) for p in self.equilibria],
            "maximal": enc(self.canonical),
            "all_maximal": [enc(p) for p in self.maximal],
            "s_star": float(self.s_star),
        }


def equilibrium_matrix(scn: Scenario, cap: int = ENUMERATION_CAP) -> np.ndarray:
    _check_cap(scn.n, cap)
    ok = best_response_matrix(gain_tables(scn))
    return ok & ok.T


def enumerate_equilibria(scn: Scenario, cap: int = ENUMERATION_CAP) -> EquilibriumReport:
    eq = equilibrium_matrix(scn, cap)
    s = participation_table(scn)
    p1, p2 = np.nonzero(eq)
    profiles = [Profile(int(a), int(b)) for a, b in zip(p1, p2)]
    values = [s[a, b] for a, b in zip(p1, p2)]
    s_star = max(values)
    tol = scn.tol
    maximal = [p for p, v in zip(profiles, values) if v >= s_star - tol]
    return EquilibriumReport(profiles, maximal, s_star)


def symmetric_equilibria(scn: Scenario, cap: int = ENUMERATION_CAP) -> list[int]:
    """Bitmasks P with (P, P) an equilibrium."""
    _check_cap(scn.n, cap)
    ok = best_response_matrix(gain_tables(scn))
    return [int(p) for p in np.nonzero(np.diag(ok))[0]]


def t_operator(scn: Scenario, S) -> int:
    """Add every signal whose holder would rather participate against the set S."""
    mask = as_mask(S, scn.n)
    tables = gain_tables(scn)
    add = (tables.abstain[:, mask] >= -scn.tol) & tables.observed
    for x in np.nonzero(add)[0]:
        mask |= 1 << int(x)
    return mask


def t_star(scn: Scenario, S) -> int:
    mask = as_mask(S, scn.n)
    for _ in range(scn.n):
        nxt = t_operator(scn, mask)
        if nxt == mask:
            break
        mask = nxt
    return mask


class Witness(NamedTuple):
    kind: str
    signal: int


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of a no-larger-equilibrium diagnostic.

    ``witnesses`` maps each profile that had to be ruled out to the reason it is
    not an equilibrium; ``failures`` lists profiles with no such reason.
    """

    holds: bool
    witnesses: dict = field(repr=False)
    failures: list
    checked: int

    def __bool__(self) -> bool:
        return self.holds


def check_condition_m(scn: Scenario, cap: int = ENUMERATION_CAP) -> ConditionReport:
    """Every profile with more expected participation than the maximal equilibrium
    must break either because a signal in both sets fails participation for some
    group (kind ``"M1"``) or because a signal in exactly one set tempts the
    abstaining group to join (kind ``"M2"``)."""
    _check_cap(scn.n, cap)
    n = scn.n
    tables = gain_tables(scn)
    s_star = enumerate_equilibria(scn, cap).s_star
    larger = participation_table(scn) > s_star + scn.tol

    B = membership_matrix(n).T.astype(bool)
    b1, b2 = B[:, None, :], B[None, :, :]
    fp, fnp = tables.fails_p.T, tables.fails_np.T
    m1 = b1 & b2 & (fp[:, None, :] | fp[None, :, :])
    m2 = (b1 & ~b2 & fnp[:, None, :]) | (~b1 & b2 & fnp[None, :, :])
    has_m1, has_m2 = m1.any(axis=2), m2.any(axis=2)

    witnesses = {}
    for a, b in zip(*np.nonzero(larger & has_m1)):
        witnesses[Profile(int(a), int(b))] = Witness("M1", int(np.argmax(m1[a, b])))
    for a, b in zip(*np.nonzero(larger & ~has_m1 & has_m2)):
        witnesses[Profile(int(a), int(b))] = Witness("M2", int(np.argmax(m2[a, b])))
    bad = np.nonzero(larger & ~has_m1 & ~has_m2)
    failures = [Profile(int(a), int(b)) for a, b in zip(*bad)]
    return ConditionReport(not failures, witnesses, failures, int(larger.sum()))


def cutoff_profile(scn: Scenario) -> Profile:
    """Symmetric profile participating at every signal at least as optimistic as
    the least optimistic signal that makes own-group-only participation worthwhile."""
    lam1 = scn.lambdas[1]
    order = scn.info.order_by_posterior()
    mu = scn.info.posteriors
    for i, x in enumerate(order):
        if mu[x] * lam1 >= scn.cost - scn.tol:
            return Profile.symmetric(order[i:], scn.n)
    return Profile(0, 0)


def sufficient_condition_m(scn: Scenario) -> bool:
    sigma = cutoff_profile(scn)
    if sigma == Profile(0, 0):
        return enumerate_equilibria(scn).s_star <= scn.tol
    return is_equilibrium(scn, sigma).ok


def check_condition_m_prime(scn: Scenario, cap: int = ENUMERATION_CAP) -> ConditionReport:
    """Every symmetric profile with a higher success probability than the best
    symmetric equilibrium has a participating signal that fails participation."""
    from .outcomes import success_probability

    if not scn.is_poisson_det:
        raise ModelNotSupported("success probabilities need Poisson groups and a fixed threshold")
    _check_cap(scn.n, cap)
    tables = gain_tables(scn)
    ok = best_response_matrix(tables)
    pis = [success_probability(scn, P) for P in range(1 << scn.n)]
    pi_bar = max(pis[P] for P in range(1 << scn.n) if ok[P, P])
    witnesses, failures, checked = {}, [], 0
    fp = tables.fails_p
    for P in range(1 << scn.n):
        if pis[P] <= pi_bar + scn.tol:
            continue
        checked += 1
        bad = [x for x in members(P, scn.n) if fp[x, P]]
        if bad:
            witnesses[Profile(P, P)] = Witness("M'", bad[0])
        else:
            failures.append(Profile(P, P))
    return ConditionReport(not failures, witnesses, failures, checked)
