"""Group sizes, resilience thresholds and pivotal probabilities.

``lambda2``, ``lambda1`` and ``lambda_o`` are the probabilities that a single
participant is decisive when both groups, only her own group, or only the other
group participate.  ``lambda_none`` is the probability that the threshold is
zero, which is when a lone participant is decisive; it vanishes for every
Poisson model with a positive threshold.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import poisson

from .errors import NotADistribution, NotFOSDOrdered, TruncationBudgetExceeded

TAIL_MASS = 1e-12
KNIFE_EDGE_BAND = 1e-9


def poisson_pmf(k, x):
    """``exp(-x) x**k / k!`` evaluated in log space (scipy)."""
    return poisson.pmf(k, x)


def poisson_cdf(k, x):
    return poisson.cdf(k, x)


def poisson_nstar(nbar: float) -> float:
    """Threshold above which a Poisson(nbar) environment encourages participation."""
    if nbar <= 0:
        raise ValueError("mean group size must be positive")
    return nbar / math.log(2)


def truncation_point(mean: float) -> int:
    """Smallest k with Poisson cdf at least ``1 - TAIL_MASS``; capped at ``10*mean + 200``."""
    cap = int(10 * mean + 200)
    k = int(poisson.isf(TAIL_MASS, mean)) if mean > 0 else 0
    if k > cap or poisson.sf(min(k, cap), mean) > TAIL_MASS:
        raise TruncationBudgetExceeded(f"Poisson({mean}) tail does not fit under k <= {cap}")
    return k


def _check_pmf(name: str, pmf) -> np.ndarray:
    arr = np.asarray(pmf, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise NotADistribution(f"{name} must be a nonempty list of probabilities")
    if (arr < -TAIL_MASS).any() or abs(arr.sum() - 1) > TAIL_MASS:
        raise NotADistribution(f"{name} is not a distribution (sum {arr.sum():.15g})")
    arr = np.clip(arr, 0.0, None)
    arr.setflags(write=False)
    return arr


def _at(pmf: np.ndarray, k: int) -> float:
    return float(pmf[k]) if 0 <= k < len(pmf) else 0.0


@dataclass(frozen=True, eq=False)
class PopulationModel:
    """Size distribution of a group (``outside``) and of one's own group minus oneself (``own``)."""

    kind: str
    mean: float
    outside_pmf: np.ndarray
    own_pmf: np.ndarray

    @classmethod
    def poisson(cls, mean: float) -> PopulationModel:
        if mean <= 0:
            raise ValueError("Poisson mean must be positive")
        pmf = poisson_pmf(np.arange(truncation_point(mean) + 1), mean)
        pmf.setflags(write=False)
        return cls("poisson", float(mean), pmf, pmf)

    @classmethod
    def deterministic(cls, n: int) -> PopulationModel:
        if n < 1:
            raise ValueError("a deterministic group needs at least one member")
        outside = np.zeros(n + 1)
        outside[n] = 1.0
        own = np.zeros(n)
        own[n - 1] = 1.0
        return cls("deterministic", float(n), _check_pmf("outside", outside), _check_pmf("own", own))

    @classmethod
    def explicit(cls, outside, own) -> PopulationModel:
        outside = _check_pmf("outside", outside)
        own = _check_pmf("own", own)
        mean = float(np.arange(len(outside)) @ outside)
        return cls("explicit", mean, outside, own)

    def own_at(self, k: int) -> float:
        return float(poisson_pmf(k, self.mean)) if self.kind == "poisson" else _at(self.own_pmf, k)

    def outside_at(self, k: int) -> float:
        return float(poisson_pmf(k, self.mean)) if self.kind == "poisson" else _at(self.outside_pmf, k)

    def sum_pmf(self) -> np.ndarray:
        """Distribution of own-group-minus-self plus the other group's size."""
        if self.kind == "poisson":
            return poisson_pmf(np.arange(truncation_point(2 * self.mean) + 1), 2 * self.mean)
        return np.convolve(self.own_pmf, self.outside_pmf)

    def sum_at(self, k: int) -> float:
        if self.kind == "poisson":
            return float(poisson_pmf(k, 2 * self.mean))
        return _at(self.sum_pmf(), k)

    def to_json(self) -> dict:
        if self.kind == "poisson":
            return {"type": "poisson", "mean": self.mean}
        if self.kind == "deterministic":
            return {"type": "deterministic", "size": int(self.mean)}
        return {"type": "explicit", "outside": self.outside_pmf.tolist(), "own": self.own_pmf.tolist()}


@dataclass(frozen=True, eq=False)
class ThresholdModel:
    """Distribution of the resilience: regime change needs resilience + 1 participants."""

    kind: str
    pmf: np.ndarray

    @classmethod
    def deterministic(cls, value: int) -> ThresholdModel:
        if value < 0 or int(value) != value:
            raise ValueError("threshold must be a nonnegative integer")
        pmf = np.zeros(int(value) + 1)
        pmf[-1] = 1.0
        pmf.setflags(write=False)
        return cls("det", pmf)

    @classmethod
    def explicit(cls, pmf) -> ThresholdModel:
        return cls("explicit", _check_pmf("threshold pmf", pmf))

    @property
    def value(self) -> int:
        """The threshold itself; only defined for deterministic models."""
        if self.kind != "det":
            raise ValueError("threshold is random")
        return len(self.pmf) - 1

    def support(self):
        return [(k, float(p)) for k, p in enumerate(self.pmf) if p > 0]

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.pmf)

    def to_json(self) -> dict:
        if self.kind == "det":
            return {"type": "det", "value": self.value}
        return {"type": "explicit", "pmf": self.pmf.tolist()}


class Environment(Enum):
    ENCOURAGEMENT = "encouragement"
    DISCOURAGEMENT = "discouragement"
    KNIFE_EDGE = "knife-edge"


def classify(lambda2: float, lambda1: float, band: float = KNIFE_EDGE_BAND) -> Environment:
    if lambda2 > lambda1 + band:
        return Environment.ENCOURAGEMENT
    if lambda1 > lambda2 + band:
        return Environment.DISCOURAGEMENT
    return Environment.KNIFE_EDGE


@dataclass(frozen=True)
class PivotalProfile:
    lambda2: float
    lambda1: float
    lambda_o: float
    lambda_none: float
    environment: Environment
    assumption1: bool


class Assumption1Warning(UserWarning):
    pass


def pivotal_profile(pop: PopulationModel, thr: ThresholdModel, *, warn: bool = True) -> PivotalProfile:
    lam2 = lam1 = lam_o = 0.0
    for k, rho in thr.support():
        lam2 += rho * pop.sum_at(k)
        lam1 += rho * pop.own_at(k)
        lam_o += rho * pop.outside_at(k)
    lam_none = float(thr.pmf[0])
    ok = max(lam1, lam2) >= lam_o - KNIFE_EDGE_BAND
    if not ok and warn:
        warnings.warn(
            f"pivotal probabilities violate max(lambda1, lambda2) >= lambda_o "
            f"({lam1:.4g}, {lam2:.4g} vs {lam_o:.4g})",
            Assumption1Warning,
            stacklevel=2,
        )
    return PivotalProfile(lam2, lam1, lam_o, lam_none, classify(lam2, lam1), ok)


def _fosd_leq(a: ThresholdModel, b: ThresholdModel, tol: float = 1e-12) -> bool:
    """True iff ``b`` first-order stochastically dominates ``a``."""
    n = max(len(a.pmf), len(b.pmf))
    fa = np.cumsum(np.pad(a.pmf, (0, n - len(a.pmf))))
    fb = np.cumsum(np.pad(b.pmf, (0, n - len(b.pmf))))
    return bool((fa >= fb - tol).all())


def check_single_crossing(pop: PopulationModel, thresholds) -> bool:
    """True iff ``lambda2 - lambda1`` never turns negative once it is nonnegative.

    ``thresholds`` must be sorted from least to most resilient.
    """
    thresholds = list(thresholds)
    for a, b in itertools.pairwise(thresholds):
        if not _fosd_leq(a, b):
            raise NotFOSDOrdered("threshold models are not sorted by first-order dominance")
    crossed = False
    for thr in thresholds:
        prof = pivotal_profile(pop, thr, warn=False)
        gap = prof.lambda2 - prof.lambda1
        if crossed and gap < -KNIFE_EDGE_BAND:
            return False
        if gap >= -KNIFE_EDGE_BAND:
            crossed = True
    return True
