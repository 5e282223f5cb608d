"""Costly voting in a committee of G members with binary signals.

A proposal passes when at least ``theta_bar + 1`` members vote for it; a member
who saw signal 1 votes when being decisive is worth the cost.  Signals are
exchangeable, so the state-1 distribution of the number of 1-signals (the
*count pmf*) carries all the information the engine needs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import (
    DegenerateModel,
    DomainError,
    NotADistribution,
    NotCadComparable,
    NotExchangeable,
)

JOINT_CAP = 20
TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CommitteeModel:
    size: int
    count_pmf: np.ndarray
    prior: float
    marginal0: float
    cost: float
    theta_bar: int = 0
    marginal1: float | None = None

    def __post_init__(self):
        G = self.size
        if G < 3:
            raise DomainError("a committee needs at least three members")
        pmf = np.asarray(self.count_pmf, dtype=float)
        if pmf.shape != (G + 1,) or (pmf < -TOL).any() or abs(pmf.sum() - 1) > 1e-9:
            raise NotADistribution(f"count pmf must be a distribution over 0..{G}")
        pmf = np.clip(pmf, 0, None)
        pmf.setflags(write=False)
        object.__setattr__(self, "count_pmf", pmf)
        implied = float(np.arange(G + 1) @ pmf) / G
        if self.marginal1 is None:
            object.__setattr__(self, "marginal1", implied)
        elif abs(self.marginal1 - implied) > 1e-9:
            raise DomainError(f"marginal1 {self.marginal1} disagrees with the count pmf ({implied:.6g})")
        if not 0 < self.prior < 1:
            raise DomainError("prior must lie in (0, 1)")
        if not 0 <= self.marginal0 <= 1:
            raise DomainError("marginal0 must lie in [0, 1]")
        if not 0 <= self.theta_bar <= G - 1:
            raise DomainError(f"threshold must lie in 0..{G - 1}")
        if self.cost <= self.posterior(0):
            raise DomainError("members who saw 0 must never want to vote (cost above their posterior)")

    @classmethod
    def from_joint(cls, joint, **kw) -> CommitteeModel:
        """Build from an exchangeable state-1 joint over {0,1}^G (array of shape (2,)*G)."""
        arr = np.asarray(joint, dtype=float)
        G = arr.ndim
        if G > JOINT_CAP:
            raise DomainError(f"explicit joints are capped at {JOINT_CAP} members")
        if arr.shape != (2,) * G:
            raise NotADistribution("joint must have shape (2, 2, ..., 2)")
        if abs(arr.sum() - 1) > 1e-9 or (arr < -TOL).any():
            raise NotADistribution("joint is not a distribution")
        counts = np.zeros(G + 1)
        seen: dict[tuple, float] = {}
        for profile in itertools.product((0, 1), repeat=G):
            key = tuple(sorted(profile))
            val = arr[profile]
            if key in seen and abs(seen[key] - val) > 1e-9:
                raise NotExchangeable(f"profiles with {sum(profile)} ones carry unequal mass")
            seen[key] = val
            counts[sum(profile)] += val
        return cls(size=G, count_pmf=counts, **kw)

    def posterior(self, signal: int) -> float:
        like1 = self.marginal1 if signal == 1 else 1 - self.marginal1
        like0 = self.marginal0 if signal == 1 else 1 - self.marginal0
        num = self.prior * like1
        den = num + (1 - self.prior) * like0
        return num / den if den > 0 else 0.0

    def with_count_pmf(self, pmf) -> CommitteeModel:
        return replace(self, count_pmf=np.asarray(pmf, dtype=float), marginal1=None)

    def with_threshold(self, theta_bar: int) -> CommitteeModel:
        return replace(self, theta_bar=theta_bar)

    def to_json(self) -> dict:
        return {
            "G": self.size,
            "count_pmf": self.count_pmf.tolist(),
            "prior": self.prior,
            "marginal1": self.marginal1,
            "marginal0": self.marginal0,
            "cost": self.cost,
            "theta_bar": self.theta_bar,
        }


def gamma_from_counts(count_pmf) -> np.ndarray:
    """Distribution of the other members' 1-signals given own signal 1."""
    pmf = np.asarray(count_pmf, dtype=float)
    k = np.arange(len(pmf))
    mean = float(k @ pmf)
    if mean <= 0:
        raise DegenerateModel("no member ever sees signal 1 in state 1")
    return (k[1:] * pmf[1:]) / mean


def gamma_given_one(model: CommitteeModel) -> np.ndarray:
    return gamma_from_counts(model.count_pmf)


def is_sigma1_equilibrium(model: CommitteeModel, tol: float = 1e-9) -> bool:
    """Everyone votes exactly after signal 1."""
    gamma = gamma_given_one(model)
    return bool(model.posterior(1) * gamma[model.theta_bar] >= model.cost - tol)


class SignChange(NamedTuple):
    k_star: int
    valid: tuple[int, ...]
    equal: bool


def _gamma(obj) -> np.ndarray:
    return gamma_given_one(obj) if isinstance(obj, CommitteeModel) else np.asarray(obj, dtype=float)


def cad_sign_change(j1, jhat1, tol: float = TOL) -> SignChange | None:
    """Index after which ``j1`` puts weakly more conditional mass than ``jhat1``.

    Accepts models or conditional pmfs.  Returns the smallest valid index with
    all valid ones recorded, or ``None`` when the pmfs cross the wrong way.
    """
    g, ghat = _gamma(j1), _gamma(jhat1)
    if g.shape != ghat.shape:
        raise DomainError("committees have different sizes")
    G = len(g)
    diff = g - ghat
    if np.abs(diff).max() <= tol:
        return SignChange(G - 2, tuple(range(G - 1)), True)
    valid = tuple(
        k for k in range(G - 1)
        if (diff[: k + 1] <= tol).all() and (diff[k + 1:] >= -tol).all()
    )
    if not valid:
        return None
    return SignChange(valid[0], valid, False)


class Effect(NamedTuple):
    verdict: str
    k_star: int
    sigma1_after: bool


PRESERVED = "preserved"
NOT_GUARANTEED = "not_guaranteed"


def similarity_effect(j1: CommitteeModel, jhat1: CommitteeModel, theta_bar: int | None = None) -> Effect:
    """Whether sincere voting survives the move from ``jhat1`` to ``j1``.

    Preserved when the sign change happens below the threshold; otherwise the
    incentive constraint is re-checked directly and reported alongside.
    """
    change = cad_sign_change(j1, jhat1)
    if change is None:
        raise NotCadComparable("the count distributions do not cross once")
    theta = jhat1.theta_bar if theta_bar is None else theta_bar
    after = is_sigma1_equilibrium(j1.with_threshold(theta))
    if change.equal or change.k_star < theta:
        return Effect(PRESERVED, change.k_star, after)
    return Effect(NOT_GUARANTEED, change.k_star, after)


def optimal_threshold(model: CommitteeModel, tol: float = 1e-9) -> int | None:
    """Lowest vote threshold at which sincere voting is an equilibrium."""
    gamma = gamma_given_one(model)
    mu = model.posterior(1)
    for k, v in enumerate(gamma):
        if mu * v >= model.cost - tol:
            return k
    return None
