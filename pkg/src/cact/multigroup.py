"""Symmetric equilibria with more than two groups.

Each of ``G`` groups has Poisson(``nbar``) members and all members of a group
share the group's signal.  ``joint1`` is the exchangeable state-1 distribution
of the signal profile, an array of shape ``(n,) * G``.  Similarity is compared
by the order that lowers the mass of every non-constant profile.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from ._bits import as_mask, members
from .errors import (
    MarginalMismatch,
    NotADistribution,
    NotExchangeable,
    SizeCapExceeded,
    ZeroMassSignal,
)
from .population import poisson_pmf

MAX_GROUPS = 6
MAX_SIGNALS = 5
TOL = 1e-9


def _check_exchangeable(joint: np.ndarray, tol: float = 1e-12):
    G = joint.ndim
    for a in range(G - 1):
        axes = list(range(G))
        axes[a], axes[a + 1] = axes[a + 1], axes[a]
        if np.abs(joint - joint.transpose(axes)).max() > tol:
            raise NotExchangeable(f"joint changes when groups {a} and {a + 1} swap")


def joint_marginal(joint: np.ndarray) -> np.ndarray:
    return joint.sum(axis=tuple(range(1, joint.ndim)))


def constant_profiles(n: int, G: int):
    return [(x,) * G for x in range(n)]


@dataclass(frozen=True, eq=False)
class MultiGroupScenario:
    joint1: np.ndarray
    marginal0: np.ndarray
    prior: float
    nbar: float
    theta_bar: int
    cost: float
    labels: tuple | None = None
    marginal1: np.ndarray = field(init=False, repr=False)
    posteriors: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        j = np.asarray(self.joint1, dtype=float)
        G, n = j.ndim, j.shape[0]
        if G > MAX_GROUPS or n > MAX_SIGNALS:
            raise SizeCapExceeded(f"at most {MAX_GROUPS} groups and {MAX_SIGNALS} signals")
        if G < 2 or j.shape != (n,) * G:
            raise NotADistribution("joint must be a cube with one axis per group")
        if (j < -1e-12).any() or abs(j.sum() - 1) > 1e-12:
            raise NotADistribution("joint1 is not a distribution")
        _check_exchangeable(j)
        m0 = np.asarray(self.marginal0, dtype=float)
        if m0.shape != (n,) or abs(m0.sum() - 1) > 1e-12 or (m0 < 0).any():
            raise NotADistribution("marginal0 is not a distribution over the signals")
        m1 = joint_marginal(j)
        num = self.prior * m1
        den = num + (1 - self.prior) * m0
        post = np.divide(num, den, out=np.zeros(n), where=den > 0)
        object.__setattr__(self, "joint1", j)
        object.__setattr__(self, "marginal0", m0)
        object.__setattr__(self, "marginal1", m1)
        object.__setattr__(self, "posteriors", post)
        if self.labels is None:
            object.__setattr__(self, "labels", tuple(range(n)))

    @property
    def G(self) -> int:
        return self.joint1.ndim

    @property
    def n(self) -> int:
        return self.joint1.shape[0]

    def with_joint(self, joint1) -> MultiGroupScenario:
        return replace(self, joint1=np.asarray(joint1, dtype=float))


def make_ci_G(marginal, G: int) -> np.ndarray:
    m = np.asarray(marginal, dtype=float)
    out = m
    for _ in range(G - 1):
        out = np.multiply.outer(out, m)
    return out


def make_fc_G(marginal, G: int) -> np.ndarray:
    m = np.asarray(marginal, dtype=float)
    out = np.zeros((len(m),) * G)
    for x, v in enumerate(m):
        out[(x,) * G] = v
    return out


def meyer_geq(j1, jhat1, tol: float = TOL) -> bool:
    """True iff ``j1`` puts weakly less mass than ``jhat1`` on every non-constant profile."""
    j, jh = np.asarray(j1, dtype=float), np.asarray(jhat1, dtype=float)
    if j.shape != jh.shape:
        raise MarginalMismatch("joints have different shapes")
    if np.abs(joint_marginal(j) - joint_marginal(jh)).max() > tol:
        raise MarginalMismatch("joints have different marginals")
    diff = j - jh
    for prof in constant_profiles(j.shape[0], j.ndim):
        diff[prof] = 0.0
    return bool((diff <= tol).all())


def meyer_transfer(joint, profile, fraction: float) -> np.ndarray:
    """Move ``fraction`` of the mass on the orbit of ``profile`` onto constant profiles.

    The mass leaving signal x is ``count_x / G`` of the moved mass, which is
    exactly what each coordinate's marginal loses, so marginals are preserved.
    """
    if not 0 <= fraction <= 1:
        raise ValueError("fraction must lie in [0, 1]")
    out = np.array(joint, dtype=float)
    G = out.ndim
    orbit = set(itertools.permutations(profile))
    moved = 0.0
    for prof in orbit:
        take = fraction * out[prof]
        out[prof] -= take
        moved += take
    counts = np.bincount(profile, minlength=out.shape[0])
    for x, k in enumerate(counts):
        out[(x,) * G] += moved * k / G
    return out


def count_conditional(scn: MultiGroupScenario, x: int, T) -> np.ndarray:
    """pmf of how many other groups see a signal in ``T`` given own signal ``x``."""
    n, G = scn.n, scn.G
    if scn.marginal1[x] <= 0:
        raise ZeroMassSignal(f"signal {scn.labels[x]!r} has zero mass in state 1")
    inside = np.zeros(n, dtype=int)
    inside[list(members(as_mask(T, n), n))] = 1
    slab = scn.joint1[x] / scn.marginal1[x]
    counts = np.zeros((n,) * (G - 1), dtype=int)
    for axis in range(G - 1):
        shape = [1] * (G - 1)
        shape[axis] = n
        counts = counts + inside.reshape(shape)
    return np.bincount(counts.ravel(), weights=slab.ravel(), minlength=G)


def _weights(scn: MultiGroupScenario, participating: bool) -> np.ndarray:
    k = np.arange(scn.G)
    means = (k + 1) * scn.nbar if participating else k * scn.nbar
    return np.array([float(poisson_pmf(scn.theta_bar, m)) for m in means])


def symmetric_gains(scn: MultiGroupScenario, P) -> np.ndarray:
    """Net gain of the prescribed action's alternative test at every signal."""
    P = as_mask(P, scn.n)
    w_in, w_out = _weights(scn, True), _weights(scn, False)
    gains = np.zeros(scn.n)
    for x in range(scn.n):
        if scn.marginal1[x] <= 0:
            gains[x] = -scn.cost
            continue
        pmf = count_conditional(scn, x, P)
        w = w_in if P >> x & 1 else w_out
        gains[x] = scn.posteriors[x] * (pmf @ w) - scn.cost
    return gains


def is_symmetric_equilibrium_G(scn: MultiGroupScenario, P, tol: float = TOL) -> bool:
    P = as_mask(P, scn.n)
    gains = symmetric_gains(scn, P)
    observed = (scn.marginal1 > 0) | (scn.marginal0 > 0)
    for x in range(scn.n):
        if not observed[x]:
            continue
        if P >> x & 1:
            if gains[x] < -tol:
                return False
        elif gains[x] > tol:
            return False
    return True


def participation_G(scn: MultiGroupScenario, P) -> float:
    P = as_mask(P, scn.n)
    return scn.G * scn.nbar * float(sum(scn.marginal1[x] for x in members(P, scn.n)))


def maximal_symmetric_G(scn: MultiGroupScenario) -> tuple[int, float]:
    best = (0, 0.0)
    for P in range(1 << scn.n):
        if is_symmetric_equilibrium_G(scn, P):
            s = participation_G(scn, P)
            if s > best[1] + TOL:
                best = (P, s)
    return best


def regime(scn: MultiGroupScenario) -> str | None:
    """``"encouragement"`` when all groups participating maximises the pivot
    probability among 1..G participating groups, ``"discouragement"`` when it
    minimises it strictly, otherwise ``None``."""
    full = float(poisson_pmf(scn.theta_bar, scn.G * scn.nbar))
    others = [float(poisson_pmf(scn.theta_bar, j * scn.nbar)) for j in range(1, scn.G)]
    if all(full >= v for v in others):
        return "encouragement"
    if all(full < v for v in others):
        return "discouragement"
    return None


def condition_m_G(scn: MultiGroupScenario, tol: float = TOL) -> bool:
    """Every symmetric profile with more participation than the maximal one has a
    participating signal that fails the participation test."""
    _, s_star = maximal_symmetric_G(scn)
    for P in range(1 << scn.n):
        if participation_G(scn, P) <= s_star + tol:
            continue
        gains = symmetric_gains(scn, P)
        if not any(gains[x] < -tol for x in members(P, scn.n)):
            return False
    return True
