"""A complete two-group game: information, group sizes, threshold and cost."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple

from ._bits import as_mask, members
from .population import PivotalProfile, PopulationModel, ThresholdModel, pivotal_profile
from .signal_info import (
    ORDER_TOL,
    InfoStructure,
    SimilarityTransform,
    apply_eti,
    to_fraction,
)


class Profile(NamedTuple):
    """Pure strategy profile: bitmasks of the signals at which each group participates."""

    p1: int
    p2: int

    @classmethod
    def symmetric(cls, subset, n: int) -> Profile:
        m = as_mask(subset, n)
        return cls(m, m)

    @classmethod
    def of(cls, s1, s2, n: int) -> Profile:
        return cls(as_mask(s1, n), as_mask(s2, n))

    @property
    def is_symmetric(self) -> bool:
        return self.p1 == self.p2

    def group(self, g: int) -> int:
        return self.p1 if g == 1 else self.p2

    def other(self, g: int) -> int:
        return self.p2 if g == 1 else self.p1

    def sets(self, n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return members(self.p1, n), members(self.p2, n)


@dataclass(frozen=True, eq=False)
class Scenario:
    info: InfoStructure
    population: PopulationModel
    threshold: ThresholdModel
    cost: float
    tol: float = field(default=ORDER_TOL)

    def __post_init__(self):
        if self.info.exact:
            object.__setattr__(self, "cost", to_fraction(self.cost))
            object.__setattr__(self, "tol", 0)
        if self.cost < 0:
            raise ValueError("participation cost must be nonnegative")

    @cached_property
    def pivotal(self) -> PivotalProfile:
        return pivotal_profile(self.population, self.threshold)

    @cached_property
    def lambdas(self) -> tuple:
        """``(lambda2, lambda1, lambda_o, lambda_none)``, as Fractions in exact mode."""
        p = self.pivotal
        vals = (p.lambda2, p.lambda1, p.lambda_o, p.lambda_none)
        if self.info.exact:
            return tuple(to_fraction(v) for v in vals)
        return vals

    @property
    def n(self) -> int:
        return self.info.n

    @property
    def nbar(self) -> float:
        return self.population.mean

    @property
    def is_poisson_det(self) -> bool:
        return self.population.kind == "poisson" and self.threshold.kind == "det"

    def with_info(self, info: InfoStructure) -> Scenario:
        return replace(self, info=info)

    def with_eti(self, t: SimilarityTransform) -> Scenario:
        return self.with_info(apply_eti(self.info, t))

    def with_cost(self, cost: float) -> Scenario:
        return replace(self, cost=cost)

    def with_threshold(self, threshold: ThresholdModel) -> Scenario:
        return replace(self, threshold=threshold)
