"""Exception hierarchy.

Everything raised on purpose by this package derives from :class:`WeakringError`.
Budget-related failures derive from :class:`BudgetExceeded`; the CLI maps those
to exit code 2.
"""


class WeakringError(Exception):
    pass


class BudgetExceeded(WeakringError):
    pass


class NotPrime(WeakringError):
    pass


class ModulusTooLargeForOrderComputation(BudgetExceeded):
    pass


class FactorizationUnavailable(BudgetExceeded):
    pass


class FactoringBudgetExceeded(BudgetExceeded):
    pass


class PrecisionInsufficient(WeakringError):
    pass


class RepeatedRootSuspected(PrecisionInsufficient):
    pass


class RoundingAmbiguous(PrecisionInsufficient):
    pass


class PowerIterationDiverged(WeakringError):
    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class SetTooLarge(BudgetExceeded):
    pass


class AttackInfeasible(BudgetExceeded):
    pass


class SampleVariantMismatch(WeakringError):
    pass


class NotCoprime(WeakringError):
    pass


class DegreeMismatch(WeakringError):
    pass


class DoesNotSplit(WeakringError):
    pass


class SchemaViolation(WeakringError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class IoFailure(WeakringError):
    pass
