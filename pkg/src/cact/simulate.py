"""Monte Carlo estimates of participation, success and welfare.

Trials are split into fixed-size chunks; chunk ``i`` draws from its own
generator seeded by ``(seed, i)``, so results do not depend on how chunks are
scheduled and the same seed always gives bit-identical output.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .scenario import Profile, Scenario

CHUNK = 1 << 14

# per-chunk sums, in this order
_FIELDS = ("n1", "s", "s2", "pi", "pi2", "w", "w2", "nc", "c", "c2")


@dataclass(frozen=True)
class SimConfig:
    trials: int = 100_000
    seed: int = 0
    condition_on_state1: bool = True
    jobs: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("need at least one trial")


@dataclass(frozen=True)
class SimResult:
    trials: int
    s_hat: float
    s_se: float
    pi_hat: float
    pi_se: float
    w_hat: float
    w_se: float
    cond_hat: float
    cond_se: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def participation_probs(scn: Scenario, sigma) -> np.ndarray:
    """``(2, n)`` array: probability that a member of each group participates at each signal.

    ``sigma`` may be a pure :class:`Profile`, a pair of probability vectors, or any
    object with ``pure_in``, ``mix_signal`` and ``beta`` (a symmetric mixed profile).
    """
    n = scn.n
    if isinstance(sigma, Profile):
        return np.array([[(p >> x) & 1 for x in range(n)] for p in sigma], dtype=float)
    if hasattr(sigma, "mix_signal"):
        row = np.array([(sigma.pure_in >> x) & 1 for x in range(n)], dtype=float)
        row[sigma.mix_signal] = sigma.beta
        return np.vstack([row, row])
    probs = np.asarray(sigma, dtype=float)
    if probs.shape != (2, n) or (probs < 0).any() or (probs > 1).any():
        raise ValueError("mixed profile must be two probability vectors over the signals")
    return probs


def _sizes(rng, scn: Scenario, size: int) -> np.ndarray:
    pop = scn.population
    if pop.kind == "poisson":
        return rng.poisson(pop.mean, size=(size, 2))
    pmf = np.asarray(pop.outside_pmf, dtype=float)
    return rng.choice(len(pmf), size=(size, 2), p=pmf / pmf.sum())


def _thresholds(rng, scn: Scenario, size: int) -> np.ndarray:
    thr = scn.threshold
    if thr.kind == "det":
        return np.full(size, thr.value)
    pmf = np.asarray(thr.pmf, dtype=float)
    return rng.choice(len(pmf), size=size, p=pmf / pmf.sum())


def _pairs(rng, joint, size: int) -> tuple[np.ndarray, np.ndarray]:
    j = np.asarray(joint, dtype=float)
    n = len(j)
    flat = j.ravel() / j.sum()
    idx = rng.choice(n * n, size=size, p=flat)
    return idx // n, idx % n


def _chunk(args) -> np.ndarray:
    scn, probs, seed, index, size, state1 = args
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    prior = float(scn.info.prior)
    cost = float(scn.cost)
    if state1:
        good = np.ones(size, dtype=bool)
    else:
        good = rng.random(size) < prior
    x1, x2 = _pairs(rng, scn.info.joint1, size)
    if not state1:
        y1, y2 = _pairs(rng, scn.info.joint0, size)
        x1, x2 = np.where(good, x1, y1), np.where(good, x2, y2)
    sizes = _sizes(rng, scn, size)
    a1, a2 = probs[0, x1], probs[1, x2]
    turnout = rng.binomial(sizes[:, 0], a1) + rng.binomial(sizes[:, 1], a2)
    success = (turnout > _thresholds(rng, scn, size)).astype(float)

    if state1:
        # state-0 signals drawn directly so welfare needs no rejection step
        y1, y2 = _pairs(rng, scn.info.joint0, size)
        bad_part = (probs[0, y1] + probs[1, y2]) / 2
        w = prior * success - cost * (prior * (a1 + a2) / 2 + (1 - prior) * bad_part)
    else:
        w = good * success - cost * (a1 + a2) / 2

    called = good & ((probs[0, x1] > 0) | (probs[1, x2] > 0))
    t, s, c = turnout[good].astype(float), success[good], success[called]
    return np.array([
        good.sum(), t.sum(), (t * t).sum(), s.sum(), (s * s).sum(),
        w.sum(), (w * w).sum(), called.sum(), c.sum(), (c * c).sum(),
    ])


def _mean_se(total: float, squares: float, count: float) -> tuple[float, float]:
    if count == 0:
        return math.nan, math.nan
    mean = total / count
    if count < 2:
        return mean, math.nan
    var = max(squares / count - mean * mean, 0.0) * count / (count - 1)
    return mean, math.sqrt(var / count)


DEFAULT_CONFIG = SimConfig()


def run_trials(scn: Scenario, sigma, cfg: SimConfig = DEFAULT_CONFIG) -> SimResult:
    """Estimate state-1 participation and success, welfare, and success given
    that some group was called out, each with a standard error."""
    probs = participation_probs(scn, sigma)
    jobs = []
    done, index = 0, 0
    while done < cfg.trials:
        size = min(CHUNK, cfg.trials - done)
        jobs.append((scn, probs, cfg.seed, index, size, cfg.condition_on_state1))
        done += size
        index += 1
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            parts = list(pool.map(_chunk, jobs))
    else:
        parts = [_chunk(j) for j in jobs]
    sums = {k: math.fsum(p[i] for p in parts) for i, k in enumerate(_FIELDS)}
    s = _mean_se(sums["s"], sums["s2"], sums["n1"])
    pi = _mean_se(sums["pi"], sums["pi2"], sums["n1"])
    w = _mean_se(sums["w"], sums["w2"], cfg.trials)
    c = _mean_se(sums["c"], sums["c2"], sums["nc"])
    return SimResult(cfg.trials, *s, *pi, *w, *c)
