"""Independent reference implementations used by the tests.

Each oracle recomputes a quantity from first principles (explicit sums over
signal pairs, group sizes or signal profiles) without calling the code it is
checking.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from scipy.optimize import brentq
from scipy.stats import poisson

SIZE_CUTOFF = 400


def pois(k: int, mean: float) -> float:
    return float(poisson.pmf(k, mean))


# two-player game


def two_player_oracle(q: float, c: float, pt: float) -> str:
    """Maximal equilibrium of the two-player game by checking every candidate.

    D(s) is the net gain from working after signal 1 when the partner works with
    probability s after signal 1.  Candidates are both work, one works, nobody
    works and a symmetric interior root of D; the one with the largest total work
    probability wins (a tie between one worker and a half mix goes to the mix).
    """

    def D(s):
        return q + pt * s * (1 - 2 * q) - c

    found = []
    if D(1) >= 0:
        found.append((2.0, "sigma1"))
    if D(0) >= 0 and D(1) <= 0:
        found.append((1.0, "sigma_a"))
    if D(0) <= 0:
        found.append((0.0, "sigma0"))
    lo, hi = D(1e-15), D(1 - 1e-15)
    if lo * hi < 0:
        root = brentq(D, 0, 1, xtol=1e-14)
        found.append((2 * root + 1e-12, "sigma_beta"))
    return max(found)[1]


# two-group engine


def gains(prior, j0, j1, lam2, lam1, lam_o, lam_none, cost, x, other):
    """(participate, deviate-to-participate) net gains for signal x when the other
    group participates on the index set ``other``."""
    m1 = sum(j1[x])
    m0 = sum(j0[x])
    mu = prior * m1 / (prior * m1 + (1 - prior) * m0)
    share = sum(j1[x][y] for y in other) / m1 if m1 > 0 else 0.0
    part = mu * (share * lam2 + (1 - share) * lam1) - cost
    abst = mu * (share * lam_o + (1 - share) * lam_none) - cost
    return part, abst


def equilibria_oracle(prior, j0, j1, lambdas, cost, tol=1e-9):
    """All pure profiles (as pairs of frozensets) passing both groups' checks."""
    n = len(j1)
    subsets = [frozenset(s) for r in range(n + 1) for s in itertools.combinations(range(n), r)]
    seen = [x for x in range(n) if sum(j1[x]) + sum(j0[x]) > 0]

    def best_reply(own, other):
        for x in seen:
            part, abst = gains(prior, j0, j1, *lambdas, cost, x, other)
            if x in own and part < -tol:
                return False
            if x not in own and abst > tol:
                return False
        return True

    return {(a, b) for a in subsets for b in subsets if best_reply(a, b) and best_reply(b, a)}


def pivotal_oracle(outside, own, thr):
    """Pivot probabilities from explicit pmfs by direct double sums."""
    lam2 = lam1 = lam_o = none = 0.0
    for k, r in enumerate(thr):
        if r == 0:
            continue
        lam1 += r * (own[k] if k < len(own) else 0.0)
        lam_o += r * (outside[k] if k < len(outside) else 0.0)
        lam2 += r * sum(own[a] * outside[k - a] for a in range(len(own)) if 0 <= k - a < len(outside))
        none += r * (k == 0)
    return lam2, lam1, lam_o, none


def success_oracle(j1, P, nbar, theta):
    """State-1 success probability by summing over signal pairs and both group sizes."""
    n = len(j1)
    total = 0.0
    top = min(SIZE_CUTOFF, int(3 * nbar + 20 * math.sqrt(nbar) + 40))
    pmf = [pois(k, nbar) for k in range(top)]
    tail = {}
    for x1 in range(n):
        for x2 in range(n):
            w = j1[x1][x2]
            if w == 0:
                continue
            key = (x1 in P, x2 in P)
            if key not in tail:
                prob = 0.0
                for n1 in range(top):
                    for n2 in range(top):
                        if n1 * key[0] + n2 * key[1] > theta:
                            prob += pmf[n1] * pmf[n2]
                tail[key] = prob
            total += w * tail[key]
    return total


# committees and many groups


def gamma_oracle(joint_cells: dict, G: int) -> list[float]:
    """P(k other members see 1 | member 0 sees 1) from an explicit joint over {0,1}^G."""
    num = [0.0] * G
    den = 0.0
    for profile, p in joint_cells.items():
        if profile[0] == 1:
            den += p
            num[sum(profile[1:])] += p
    return [v / den for v in num]


def exchangeable_joint(count_pmf) -> dict:
    """Spread each count's mass evenly over the profiles with that many ones."""
    G = len(count_pmf) - 1
    cells = {}
    for profile in itertools.product((0, 1), repeat=G):
        k = sum(profile)
        cells[profile] = count_pmf[k] / math.comb(G, k)
    return cells


def count_conditional_oracle(joint, x, T) -> list[float]:
    """pmf of how many of the other groups see a signal in T, given group 0 sees x."""
    G = joint.ndim
    n = joint.shape[0]
    out = [0.0] * G
    den = 0.0
    for profile in itertools.product(range(n), repeat=G):
        if profile[0] != x:
            continue
        p = float(joint[profile])
        den += p
        out[sum(y in T for y in profile[1:])] += p
    return [v / den for v in out]


# exact arithmetic helper


def frac_matrix(rows) -> list[list[Fraction]]:
    return [[Fraction(v) for v in row] for row in rows]
