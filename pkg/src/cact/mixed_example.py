"""Mixed strategies: single-signal mixing under Poisson groups, and the
two-player game with a solo-completion probability ``q``.

In the two-player game each player sees signal 1 with probability ``p`` in the
good state and never in the bad state, and ``p_tilde`` is the probability that
the partner also saw 1 given that you did.  Working costs ``c > 1/2``; the project
succeeds for sure with two workers and with probability ``q`` with one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from ._bits import as_mask, members
from .errors import DomainError, ModelNotSupported, NonnegativityViolated, NoRoot
from .population import PopulationModel, ThresholdModel, poisson_pmf
from .scenario import Scenario
from .signal_info import SimilarityTransform, build_info_structure, eti, make_ci

GRID_POINTS = 10_000
ROOT_XTOL = 1e-10


@dataclass(frozen=True)
class MixedProfile:
    """Symmetric profile: participate on ``pure_in``, mix with probability ``beta`` on ``mix_signal``."""

    pure_in: int
    pure_out: int
    mix_signal: int
    beta: float


class MixRoot(NamedTuple):
    beta: float
    residual: float
    ic_ok: bool
    violations: tuple


def _psi(theta: int, mean: float) -> float:
    return float(poisson_pmf(theta, mean))


def solve_one_signal_mixing(scn: Scenario, P, NP, x_star: int, grid: int = GRID_POINTS,
                            xtol: float = ROOT_XTOL) -> list[MixRoot]:
    """All mixing probabilities on ``x_star`` that leave its holders indifferent.

    Roots are bracketed by a sign scan over ``grid`` points and refined by
    Brent's method.  Each root also reports whether the pure signals keep their
    prescribed action against the mixed profile.
    """
    if not scn.is_poisson_det:
        raise ModelNotSupported("single-signal mixing needs Poisson groups and a fixed threshold")
    n = scn.n
    P, NP = as_mask(P, n), as_mask(NP, n)
    if P & NP or P >> x_star & 1 or NP >> x_star & 1 or (P | NP | 1 << x_star) != (1 << n) - 1:
        raise ValueError("P, NP and the mixing signal must partition the signal space")

    info = scn.info
    theta, nbar, c = scn.threshold.value, scn.nbar, float(scn.cost)
    cond = np.asarray(info.cond1, dtype=float)
    mu = np.asarray([float(v) if info.observed[x] else 0.0 for x, v in enumerate(info.posteriors)])
    p_idx, np_idx = list(members(P, n)), list(members(NP, n))

    def shares(x):
        return cond[x, p_idx].sum(), cond[x, x_star], cond[x, np_idx].sum()

    def gain_in(x, beta):
        s_p, s_x, s_np = shares(x)
        lhs = s_p * _psi(theta, 2 * nbar) + s_x * _psi(theta, (1 + beta) * nbar) + s_np * _psi(theta, nbar)
        return mu[x] * lhs - c

    def gain_out(x, beta):
        s_p, s_x, s_np = shares(x)
        lhs = s_p * _psi(theta, nbar) + s_x * _psi(theta, beta * nbar) + s_np * _psi(theta, 0.0)
        return mu[x] * lhs - c

    def indifference(beta):
        s_p, s_x, s_np = shares(x_star)
        lhs = (s_x * _psi(theta, 2 * beta * nbar) + s_p * _psi(theta, (1 + beta) * nbar)
               + s_np * _psi(theta, beta * nbar))
        return mu[x_star] * lhs - c

    betas = np.linspace(0.0, 1.0, grid)
    vals = np.array([indifference(b) for b in betas])
    found = []
    for i, v in enumerate(vals):
        if v == 0.0:
            found.append(float(betas[i]))
        elif i + 1 < grid and v * vals[i + 1] < 0:
            found.append(brentq(indifference, betas[i], betas[i + 1], xtol=xtol))
    roots = []
    for beta in sorted(set(found)):
        bad = [("IC:P", x) for x in p_idx if info.observed[x] and gain_in(x, beta) < -scn.tol]
        bad += [("IC:NP", x) for x in np_idx if info.observed[x] and gain_out(x, beta) > scn.tol]
        roots.append(MixRoot(beta, indifference(beta), not bad, tuple(bad)))
    return roots


def solve_one_signal_mixing_strict(scn: Scenario, P, NP, x_star: int, **kw) -> list[MixRoot]:
    roots = solve_one_signal_mixing(scn, P, NP, x_star, **kw)
    if not roots:
        raise NoRoot("no mixing probability makes the mixing signal indifferent")
    return roots


# two-player game


SIGMA0, SIGMA_A, SIGMA_BETA, SIGMA1, BOUNDARY = "sigma0", "sigma_a", "sigma_beta", "sigma1", "boundary"


@dataclass(frozen=True)
class TwoPlayerScenario:
    q: float
    c: float
    p: float
    alpha: float = 0.0

    def __post_init__(self):
        _check_cost(self.c)
        for name in ("q", "p"):
            if not 0 <= getattr(self, name) <= 1:
                raise DomainError(f"{name} must lie in [0, 1]")
        if not 0 < self.p:
            raise DomainError("p must be positive")
        if self.alpha < 0 or self.alpha > self.p * (1 - self.p) + 1e-12:
            raise NonnegativityViolated("alpha must lie in [0, p(1-p)]")

    @property
    def p_tilde(self) -> float:
        return p_tilde(self.p, self.alpha)


def p_tilde(p: float, alpha: float) -> float:
    """Probability the partner saw 1 given you saw 1, after a transfer of ``alpha``."""
    return p + alpha / p


def _check_cost(c: float):
    if not 0.5 < c < 1:
        raise DomainError(f"cost {c} must lie in (1/2, 1)")


def _raw_thresholds(c: float, pt: float) -> tuple[float, float, float]:
    """Unclamped cut points; infinities mark regions that never occur."""
    if pt < 0.5:
        q_star = (c - pt) / (1 - 2 * pt)
    else:
        q_star = math.inf
    q_dstar = (pt - c) / (2 * pt - 1) if pt > 0.5 else -math.inf
    q_hat = 0.5 * ((2 * c - 1) / (1 - pt) + 1) if pt < 1 else math.inf
    return q_star, q_dstar, q_hat


class Thresholds(NamedTuple):
    q_star: float
    q_double_star: float
    q_hat: float


def two_player_thresholds(c: float, p_tilde: float) -> Thresholds:
    """Cut points in ``q``: both work above ``q_star`` (when ``q > 1/2``) and below
    ``q_double_star`` (when ``q < 1/2``); symmetric mixing beats one worker above ``q_hat``."""
    _check_cost(c)
    if not 0 <= p_tilde <= 1:
        raise DomainError("p_tilde must lie in [0, 1]")
    q_star, q_dstar, q_hat = _raw_thresholds(c, p_tilde)
    return Thresholds(min(1.0, q_star), max(0.0, q_dstar), min(1.0, q_hat))


def mixing_probability(q: float, c: float, p_tilde: float) -> float:
    """Work probability after signal 1 that leaves the partner indifferent."""
    return (q - c) / ((2 * q - 1) * p_tilde)


class TwoPlayerOutcome(NamedTuple):
    label: str
    beta: float | None
    boundary: bool


def two_player_maximal(q: float, c: float, p_tilde: float, tol: float = 1e-12) -> TwoPlayerOutcome:
    """Equilibrium with the most expected effort.

    ``boundary`` is set when the point lies on a region edge; the label there
    follows the weak inequalities of the incentive constraints.  At
    ``p_tilde`` equal to ``c`` or ``1 - c`` the label itself is ``"boundary"``.
    """
    _check_cost(c)
    if not (0 <= q <= 1 and 0 <= p_tilde <= 1):
        raise DomainError("q and p_tilde must lie in [0, 1]")
    if abs(p_tilde - (1 - c)) <= tol or abs(p_tilde - c) <= tol:
        return TwoPlayerOutcome(BOUNDARY, None, True)
    q_star, q_dstar, q_hat = _raw_thresholds(c, p_tilde)

    if p_tilde < 0.5 and q >= q_star - tol:
        return TwoPlayerOutcome(SIGMA1, None, abs(q - q_star) <= tol)
    if p_tilde > 0.5 and q <= q_dstar + tol:
        return TwoPlayerOutcome(SIGMA1, None, abs(q - q_dstar) <= tol)
    if q >= c - tol:
        edge = abs(q - c) <= tol
        beta = mixing_probability(q, c, p_tilde) if p_tilde > 0 and q > 0.5 else None
        if beta is not None and q >= q_hat - tol:
            return TwoPlayerOutcome(SIGMA_BETA, beta, edge or abs(q - q_hat) <= tol)
        return TwoPlayerOutcome(SIGMA_A, beta, edge or abs(q - q_hat) <= tol)
    return TwoPlayerOutcome(SIGMA0, None, False)


def embed_two_player(q: float, p: float, alpha: float, cost: float, prior: float = 0.5) -> Scenario:
    """The two-player game as a two-group scenario with groups of exactly one agent.

    The threshold is zero with probability ``q`` (one worker suffices) and one
    otherwise; in the bad state every agent sees signal 0.
    """
    if alpha > p * (1 - p) + 1e-12:
        raise NonnegativityViolated("alpha exceeds the off-diagonal mass p(1-p)")
    joint1 = make_ci([1 - p, p])
    if alpha > 0:
        joint1 = eti(joint1, SimilarityTransform((0, 1), alpha))
    joint0 = np.array([[1.0, 0.0], [0.0, 0.0]])
    info = build_info_structure(prior, joint0, joint1, [0, 1])
    return Scenario(info, PopulationModel.deterministic(1), ThresholdModel.explicit([q, 1 - q]), cost)
