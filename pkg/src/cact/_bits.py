"""Bitmask helpers for subsets of a small finite signal space."""

from functools import lru_cache

import numpy as np


def mask_of(indices) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << int(i)
    return mask


def members(mask: int, n: int) -> tuple[int, ...]:
    return tuple(i for i in range(n) if mask >> i & 1)


@lru_cache(maxsize=32)
def membership_matrix(n: int) -> np.ndarray:
    """``M[i, S] = 1`` iff signal ``i`` belongs to the subset with bitmask ``S``."""
    subsets = np.arange(1 << n)
    out = (subsets[None, :] >> np.arange(n)[:, None]) & 1
    out.setflags(write=False)
    return out


def as_mask(subset, n: int) -> int:
    """Accept an int bitmask or an iterable of indices."""
    if isinstance(subset, (int, np.integer)):
        if subset < 0 or subset >= 1 << n:
            raise ValueError(f"bitmask {subset} out of range for {n} signals")
        return int(subset)
    return mask_of(subset)
