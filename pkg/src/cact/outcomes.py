"""Participation, success, welfare and informativeness of strategy profiles.

Success probabilities use the closed form for Poisson groups and a fixed
threshold, and assume both groups use the same participation set P.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from ._bits import as_mask
from .equilibrium2 import expected_participation, symmetric_equilibria
from .errors import ModelNotSupported, UndefinedConditional
from .population import poisson_cdf
from .scenario import Profile, Scenario
from .signal_info import mass

__all__ = [
    "OutcomeReport",
    "conditional_success_given_turnout",
    "eti_success_shift",
    "expected_participation",
    "informativeness",
    "max_success",
    "max_welfare",
    "most_informative_set",
    "outcome_report",
    "success_probability",
    "success_probability_mc",
    "welfare",
]


def _symmetric_mask(scn: Scenario, P) -> int:
    if isinstance(P, Profile):
        if not P.is_symmetric:
            raise ModelNotSupported(
                "closed-form success probability needs a symmetric profile; "
                "use success_probability_mc for asymmetric ones"
            )
        return P.p1
    return as_mask(P, scn.n)


def _require_poisson_det(scn: Scenario):
    if not scn.is_poisson_det:
        raise ModelNotSupported(
            "closed-form success probability needs Poisson groups and a fixed threshold; "
            "use success_probability_mc"
        )


def _tails(scn: Scenario) -> tuple[float, float]:
    """P(one group's size > threshold), P(both groups' sizes > threshold)."""
    theta, nbar = scn.threshold.value, scn.nbar
    return 1 - poisson_cdf(theta, nbar), 1 - poisson_cdf(theta, 2 * nbar)


def _split_masses(scn: Scenario, P: int) -> tuple[float, float, float]:
    full = (1 << scn.n) - 1
    j1 = scn.info.joint1
    return float(mass(j1, P, P)), float(mass(j1, P, full ^ P)), float(mass(j1, full ^ P, full ^ P))


def success_probability(scn: Scenario, P) -> float:
    """Probability of regime change in state 1 when both groups participate on P."""
    _require_poisson_det(scn)
    P = _symmetric_mask(scn, P)
    one, two = _tails(scn)
    both, single, _ = _split_masses(scn, P)
    return two * both + 2 * one * single


def success_probability_mc(scn: Scenario, sigma: Profile, trials: int = 100_000, seed: int = 0):
    """Monte Carlo estimate (value, standard error) for any profile and model."""
    from .simulate import SimConfig, run_trials

    warnings.warn("success probability estimated by simulation", stacklevel=2)
    res = run_trials(scn, sigma, SimConfig(trials=trials, seed=seed))
    return res.pi_hat, res.pi_se


def eti_success_shift(scn: Scenario, alpha: float) -> float:
    """Change in success probability when ``alpha`` moves across the boundary of P."""
    _require_poisson_det(scn)
    one, two = _tails(scn)
    return alpha * (two - 2 * one)


def max_success(scn: Scenario) -> tuple[int, float]:
    """Best symmetric equilibrium by success probability: (bitmask, value)."""
    best = (0, 0.0)
    for P in symmetric_equilibria(scn):
        pi = success_probability(scn, P)
        if pi > best[1]:
            best = (P, pi)
    return best


def welfare(scn: Scenario, P) -> float:
    """Ex-ante payoff of a representative agent: prior * success - cost * P(participate)."""
    P = _symmetric_mask(scn, P)
    info = scn.info
    prior = float(info.prior)
    participate = sum(
        prior * float(info.marginal1[x]) + (1 - prior) * float(info.marginal0[x])
        for x in range(scn.n)
        if P >> x & 1
    )
    if P == 0:
        return 0.0
    return prior * success_probability(scn, P) - float(scn.cost) * participate


def max_welfare(scn: Scenario) -> float:
    return max(welfare(scn, P) for P in symmetric_equilibria(scn))


def conditional_success_given_turnout(scn: Scenario, P) -> float:
    """Success probability in state 1 given that some group was called out (a signal in P)."""
    _require_poisson_det(scn)
    P = _symmetric_mask(scn, P)
    both, single, neither = _split_masses(scn, P)
    if neither >= 1 - 1e-15:
        raise UndefinedConditional("no group ever receives a participation signal")
    one, two = _tails(scn)
    return (two * both + 2 * one * single) / (1 - neither)


def informativeness(scn: Scenario, P) -> float:
    P = as_mask(P, scn.n)
    info = scn.info
    return float(sum(info.marginal1[x] - info.marginal0[x] for x in range(scn.n) if P >> x & 1))


def most_informative_set(scn: Scenario) -> int:
    info = scn.info
    return as_mask([x for x in range(scn.n) if info.marginal1[x] > info.marginal0[x]], scn.n)


@dataclass(frozen=True)
class OutcomeReport:
    s: float
    pi: float
    welfare: float
    info: float


def outcome_report(scn: Scenario, P) -> OutcomeReport:
    P = _symmetric_mask(scn, P)
    return OutcomeReport(
        s=float(expected_participation(scn, Profile(P, P))),
        pi=success_probability(scn, P),
        welfare=welfare(scn, P),
        info=informativeness(scn, P),
    )
