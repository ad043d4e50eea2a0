"""Exception hierarchy shared by all torsionlab modules."""


class TorsionLabError(Exception):
    """Base class for every error raised by this package."""


class SingularMatrix(TorsionLabError, ValueError):
    pass


class NotPrime(TorsionLabError, ValueError):
    pass


class NotCongruent(TorsionLabError, ValueError):
    pass


class IsUnipotent(TorsionLabError, ValueError):
    pass


class DetNotUnit(TorsionLabError, ValueError):
    pass


class BudgetExceeded(TorsionLabError, RuntimeError):
    pass


class NonpositiveTime(TorsionLabError, ValueError):
    pass


class NonpositiveT(TorsionLabError, ValueError):
    pass


class HasKernel(TorsionLabError, ValueError):
    pass


class UnsupportedModel(TorsionLabError, TypeError):
    pass


class DivergentTail(TorsionLabError, ValueError):
    pass


class QuadratureFailure(TorsionLabError, ArithmeticError):
    pass


class PoleTooDeep(TorsionLabError, ArithmeticError):
    pass


class PoleAtOne(TorsionLabError, ValueError):
    pass


class PoleAtZero(TorsionLabError, ArithmeticError):
    pass


class PoleRemains(TorsionLabError, ArithmeticError):
    pass


class NotAcyclic(TorsionLabError, ValueError):
    pass


class Infeasible(TorsionLabError, ValueError):
    """Raised when an error budget cannot beat the target exponent.

    The offending ``beta`` and ``report`` are attached so callers can still
    inspect the optimum that was found.
    """

    def __init__(self, message, beta=None, report=None):
        super().__init__(message)
        self.beta = beta
        self.report = report


class InputError(TorsionLabError, ValueError):
    pass


class ZetaPole(TorsionLabError, ArithmeticError):
    """The continued zeta function has a pole at the requested point."""
