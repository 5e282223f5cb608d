"""Finite signal spaces, joint signal distributions and the CAD order.

A *slice* is the |X| x |X| joint distribution of the two groups' signals in one
state (row = group 1's signal).  Slices are numpy arrays; when the entries are
``fractions.Fraction`` objects (``dtype=object``) every check runs in exact
arithmetic with zero tolerance.
"""

from __future__ import annotations

import itertools
from collections.abc import Hashable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._bits import as_mask, members, membership_matrix
from .errors import (
    MarginalMismatch,
    NegativeMass,
    NonnegativityViolated,
    NotADistribution,
    NotExchangeable,
    PosteriorNotInjective,
    SizeCapExceeded,
    ZeroMassSignal,
)

ORDER_TOL = 1e-9
DIST_TOL = 1e-12
CAD_SIZE_CAP = 16


def is_exact(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def to_fraction(value) -> Fraction:
    """Exact rational from a float, int, string or Fraction.

    Floats are snapped to the nearest rational with denominator at most 1e9,
    so ``0.45`` becomes ``9/20`` and float products of short decimals such as
    ``0.35 * 0.05`` recover their intended value.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(float(value)).limit_denominator(10**9)


def as_slice(a, exact: bool = False) -> np.ndarray:
    if exact:
        arr = np.asarray(a, dtype=object)
        return np.vectorize(to_fraction, otypes=[object])(arr) if arr.size else arr
    if is_exact(np.asarray(a)):
        return np.asarray(a, dtype=object)
    return np.asarray(a, dtype=float)


def _tol(a, tol: float):
    return 0 if is_exact(a) else tol


def conditional_matrix(j: np.ndarray) -> np.ndarray:
    """Row-normalised slice; rows of zero-marginal signals are left at zero."""
    m = j.sum(axis=1)
    out = np.zeros_like(j)
    for x in range(len(j)):
        if m[x] > 0:
            out[x] = j[x] / m[x]
    return out


@dataclass(frozen=True)
class SignalSpace:
    """Ordered signal labels; list order is the order used for cutoffs."""

    labels: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(labels) < 2:
            raise ValueError("a signal space needs at least two signals")
        if len(set(labels)) != len(labels):
            raise ValueError(f"signal labels are not distinct: {labels}")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def range(cls, n: int, start: int = 0) -> SignalSpace:
        return cls(tuple(range(start, start + n)))

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: Hashable) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown signal {label!r}") from None

    def indices(self, labels) -> tuple[int, ...]:
        return tuple(self.index(lab) for lab in labels)

    def subset_labels(self, mask: int) -> list:
        return [self.labels[i] for i in members(mask, len(self))]


def _validate_slice(name: str, j: np.ndarray, n: int) -> np.ndarray:
    if j.shape != (n, n):
        raise NotADistribution(f"{name} has shape {j.shape}, expected {(n, n)}")
    exact = is_exact(j)
    tol = 0 if exact else DIST_TOL
    if (j < -tol).any():
        raise NegativeMass(f"{name} has a negative entry")
    if not exact:
        j = np.clip(j, 0.0, None)
    total = j.sum()
    if abs(total - 1) > tol:
        raise NotADistribution(f"{name} sums to {float(total):.15g}, not 1")
    asym = np.abs(j - j.T).max()
    if asym > tol:
        raise NotExchangeable(f"{name} is not symmetric (max asymmetry {float(asym):.3g})")
    if not exact:
        j = (j + j.T) / 2
    return j


@dataclass(frozen=True, eq=False)
class InfoStructure:
    """Prior on state 1 plus one symmetric joint per state, validated.

    Use :func:`build_info_structure` rather than the constructor directly.
    """

    prior: float
    joint0: np.ndarray
    joint1: np.ndarray
    space: SignalSpace
    marginal0: np.ndarray = field(init=False, repr=False)
    marginal1: np.ndarray = field(init=False, repr=False)
    cond0: np.ndarray = field(init=False, repr=False)
    cond1: np.ndarray = field(init=False, repr=False)
    posteriors: np.ndarray = field(init=False, repr=False)
    observed: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.space)
        exact = is_exact(self.joint0) or is_exact(self.joint1)
        j0 = as_slice(self.joint0, exact)
        j1 = as_slice(self.joint1, exact)
        prior = to_fraction(self.prior) if exact else float(self.prior)
        if not 0 < prior < 1:
            raise NotADistribution(f"prior {self.prior} is not in (0, 1)")
        j0 = _validate_slice("joint0", j0, n)
        j1 = _validate_slice("joint1", j1, n)
        m0, m1 = j0.sum(axis=1), j1.sum(axis=1)
        observed = (m0 > 0) | (m1 > 0)
        post = np.empty(n, dtype=object if exact else float)
        for x in range(n):
            if observed[x]:
                num = prior * m1[x]
                post[x] = num / (num + (1 - prior) * m0[x])
            else:
                post[x] = np.nan
        seen = post[observed]
        order = sorted(range(len(seen)), key=lambda i: seen[i])
        for a, b in itertools.pairwise(order):
            if abs(seen[b] - seen[a]) <= (0 if exact else DIST_TOL):
                raise PosteriorNotInjective(
                    f"signals share the posterior {float(seen[a]):.6g}"
                )
        values = {
            "prior": prior,
            "joint0": j0,
            "joint1": j1,
            "marginal0": m0,
            "marginal1": m1,
            "cond0": conditional_matrix(j0),
            "cond1": conditional_matrix(j1),
            "posteriors": post,
            "observed": observed,
        }
        for key, val in values.items():
            if isinstance(val, np.ndarray):
                val.setflags(write=False)
            object.__setattr__(self, key, val)

    @property
    def n(self) -> int:
        return len(self.space)

    @property
    def exact(self) -> bool:
        return is_exact(self.joint1)

    def joint(self, state: int) -> np.ndarray:
        return self.joint1 if state == 1 else self.joint0

    def marginal(self, state: int) -> np.ndarray:
        return self.marginal1 if state == 1 else self.marginal0

    def conditional(self, state: int) -> np.ndarray:
        return self.cond1 if state == 1 else self.cond0

    def posterior(self, x: int) -> float:
        if not self.observed[x]:
            raise ZeroMassSignal(f"signal {self.space.labels[x]!r} has zero mass in both states")
        return self.posteriors[x]

    def with_joint(self, state: int, joint) -> InfoStructure:
        j0, j1 = (self.joint0, joint) if state == 1 else (joint, self.joint1)
        return InfoStructure(self.prior, j0, j1, self.space)

    def order_by_posterior(self) -> list[int]:
        """Observed signal indices sorted by increasing posterior."""
        obs = [x for x in range(self.n) if self.observed[x]]
        return sorted(obs, key=lambda x: self.posteriors[x])


def build_info_structure(prior, joint0, joint1, space: SignalSpace | Sequence | None = None,
                         *, exact: bool = False) -> InfoStructure:
    j1 = as_slice(joint1, exact)
    if space is None:
        space = SignalSpace.range(len(j1))
    elif not isinstance(space, SignalSpace):
        space = SignalSpace(tuple(space))
    return InfoStructure(prior, as_slice(joint0, exact), j1, space)


def posterior(info: InfoStructure, x: int) -> float:
    return info.posterior(x)


def conditional_mass(info: InfoStructure, state: int, x: int, T) -> float:
    """Probability that the other group's signal lies in ``T`` given own signal ``x``."""
    if info.marginal(state)[x] <= 0:
        raise ZeroMassSignal(f"signal {info.space.labels[x]!r} has zero mass in state {state}")
    idx = list(members(as_mask(T, info.n), info.n))
    return info.conditional(state)[x, idx].sum()


def mass(j: np.ndarray, rows, cols) -> float:
    """``J(S, T)``: probability that group 1's signal is in S and group 2's in T."""
    n = len(j)
    r = list(members(as_mask(rows, n), n))
    c = list(members(as_mask(cols, n), n))
    if not r or not c:
        return j.dtype.type(0) if not is_exact(j) else Fraction(0)
    return j[np.ix_(r, c)].sum()


def _check_marginals(j: np.ndarray, jhat: np.ndarray, tol: float) -> np.ndarray:
    if j.shape != jhat.shape:
        raise MarginalMismatch(f"slices have shapes {j.shape} and {jhat.shape}")
    m, mhat = j.sum(axis=1), jhat.sum(axis=1)
    gap = np.abs(m - mhat).max()
    if gap > tol:
        raise MarginalMismatch(f"marginals differ by {float(gap):.3g}")
    return m


def is_cad_geq(j, jhat, tol: float = ORDER_TOL) -> bool:
    """True iff ``j`` concentrates at least as much mass on the diagonal as ``jhat``.

    Checked directly on every (signal, subset) pair: for each y with positive
    marginal and each T, the conditional mass of T given y must weakly rise
    when y is in T and weakly fall when it is not.
    """
    j, jhat = as_slice(j), as_slice(jhat)
    tol = _tol(j, tol)
    m = _check_marginals(j, jhat, tol)
    n = len(j)
    if n > CAD_SIZE_CAP:
        raise SizeCapExceeded(f"subset check is capped at {CAD_SIZE_CAP} signals")
    M = membership_matrix(n)
    rows = [y for y in range(n) if m[y] > tol]
    if is_exact(j):
        M = M.astype(object)
    gap = (conditional_matrix(j)[rows] - conditional_matrix(jhat)[rows]) @ M
    inside = membership_matrix(n)[rows].astype(bool)
    ok = np.where(inside, gap >= -tol, gap <= tol)
    return bool(ok.all())


def pairwise_transfers(j, jhat) -> np.ndarray:
    """Off-diagonal mass removed from ``jhat`` to reach ``j`` (zero diagonal)."""
    j, jhat = as_slice(j), as_slice(jhat)
    w = jhat - j
    for i in range(len(w)):
        w[i, i] = 0
    return w


def cad_decompose(j, jhat, tol: float = ORDER_TOL):
    """Express ``j`` as ``jhat`` plus a batch of diagonal transfers.

    Returns ``{frozenset(T): alpha_T}`` with ``alpha_T = j(T,T) - jhat(T,T)``,
    or ``None`` when no such decomposition with nonnegative transfers exists.
    The transfers are read off pairwise (one per unordered signal pair); each
    ``alpha_T`` is then the total transferred mass whose pair straddles T, and
    both subset identities are re-verified against the slices.
    """
    j, jhat = as_slice(j), as_slice(jhat)
    tol = _tol(j, tol)
    _check_marginals(j, jhat, tol)
    n = len(j)
    if n > CAD_SIZE_CAP:
        raise SizeCapExceeded(f"decomposition is capped at {CAD_SIZE_CAP} signals")
    w = pairwise_transfers(j, jhat)
    if (w < -tol).any():
        return None
    rebuilt = jhat.copy()
    for i in range(n):
        for k in range(i + 1, n):
            rebuilt[i, i] += w[i, k]
            rebuilt[k, k] += w[i, k]
            rebuilt[i, k] -= w[i, k]
            rebuilt[k, i] -= w[i, k]
    if np.abs(rebuilt - j).max() > tol:
        return None

    M = membership_matrix(n)
    if is_exact(j):
        M = M.astype(object)
    alpha = w.sum(axis=1) @ M - ((w @ M) * M).sum(axis=0)
    same_j = ((j @ M) * M).sum(axis=0)
    same_jhat = ((jhat @ M) * M).sum(axis=0)
    cross_j = ((j @ (1 - M)) * M).sum(axis=0)
    cross_jhat = ((jhat @ (1 - M)) * M).sum(axis=0)
    if np.abs(alpha - (same_j - same_jhat)).max() > tol:
        return None
    if np.abs(cross_j - (cross_jhat - alpha)).max() > tol:
        return None
    if (alpha < -tol).any():
        return None
    return {frozenset(members(T, n)): alpha[T] for T in range(1 << n)}


@dataclass(frozen=True)
class SimilarityTransform:
    """Move ``mass`` from cells (i, j) and (j, i) onto (i, i) and (j, j)."""

    pair: tuple[int, int]
    mass: float
    state: int = 1

    def __post_init__(self):
        i, k = self.pair
        if i == k:
            raise ValueError("a similarity transform needs two distinct signals")
        if self.mass < 0:
            raise ValueError("transfer mass must be nonnegative")
        if self.state not in (0, 1):
            raise ValueError("state must be 0 or 1")


def eti(j, t: SimilarityTransform, tol: float = DIST_TOL) -> np.ndarray:
    j = as_slice(j)
    i, k = t.pair
    alpha = to_fraction(t.mass) if is_exact(j) else float(t.mass)
    tol = _tol(j, tol)
    if j[i, k] - alpha < -tol or j[k, i] - alpha < -tol:
        raise NonnegativityViolated(
            f"cannot move {float(alpha):.6g} out of cell {t.pair} holding {float(j[i, k]):.6g}"
        )
    out = j.copy()
    out[i, i] += alpha
    out[k, k] += alpha
    out[i, k] -= alpha
    out[k, i] -= alpha
    if not is_exact(out):
        out[i, k] = max(out[i, k], 0.0)
        out[k, i] = max(out[k, i], 0.0)
    return out


def apply_eti(info: InfoStructure, t: SimilarityTransform) -> InfoStructure:
    return info.with_joint(t.state, eti(info.joint(t.state), t))


def _check_marginal(marginal) -> np.ndarray:
    m = as_slice(marginal)
    tol = _tol(m, DIST_TOL)
    if m.ndim != 1 or (m < -tol).any() or abs(m.sum() - 1) > tol:
        raise NotADistribution(f"{marginal!r} is not a distribution")
    return m


def make_ci(marginal) -> np.ndarray:
    m = _check_marginal(marginal)
    return np.outer(m, m)


def make_fc(marginal) -> np.ndarray:
    m = _check_marginal(marginal)
    out = np.zeros((len(m), len(m)), dtype=m.dtype)
    if is_exact(m):
        out[:] = Fraction(0)
    np.fill_diagonal(out, m)
    return out
