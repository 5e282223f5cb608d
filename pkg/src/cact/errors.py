"""Exception hierarchy.

Every error raised by the package derives from :class:`CactError`, which is a
``ValueError`` so callers that only care about bad input can catch that.
"""


class CactError(ValueError):
    """Base class for all package errors."""


# information structures
class NotADistribution(CactError):
    pass


class NotExchangeable(CactError):
    pass


class PosteriorNotInjective(CactError):
    pass


class NegativeMass(CactError):
    pass


class ZeroMassSignal(CactError):
    pass


class MarginalMismatch(CactError):
    pass


class NonnegativityViolated(CactError):
    pass


# population and threshold models
class TruncationBudgetExceeded(CactError):
    pass


class NotFOSDOrdered(CactError):
    pass


# engines
class SizeCapExceeded(CactError):
    pass


class ModelNotSupported(CactError):
    pass


class UndefinedConditional(CactError):
    pass


class NoRoot(CactError):
    pass


class DomainError(CactError):
    pass


class DegenerateModel(CactError):
    pass


class NotCadComparable(CactError):
    pass


class PremiseFailed(CactError):
    pass


class AssumptionB2Failed(CactError):
    """Raised when the cutoff-monotonicity premise on ``g(y, x)`` fails."""


# scenario files and the command line
class ParseError(CactError):
    pass


class ValidationError(CactError):
    """Scenario failed validation; ``problems`` lists every violated invariant."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class UnknownName(CactError):
    pass
