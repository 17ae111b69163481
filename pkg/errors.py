"""Exception hierarchy shared by every module of the random-zeros toolkit."""


class RandomZerosError(Exception):
    """Base class for all library failures"""


class DomainError(RandomZerosError, ValueError):
    """Argument outside the operation's domain"""


class ConvergenceError(RandomZerosError):
    """An iterative method ran out of budget before meeting its tolerance"""

    def __init__(self, message, evaluations=None, residuals=None):
        super().__init__(message)
        self.evaluations = evaluations
        self.residuals = residuals


class EvaluationError(RandomZerosError):
    """A density or kernel could not be evaluated at the requested point"""


class DegenerateChainError(RandomZerosError):
    """Sturm chain collapsed, usually from a near-multiple root"""


class UnsupportedFamilyError(RandomZerosError, ValueError):
    """No closed form or construction exists for the requested family"""


def require(condition, message, exc=DomainError):
    """Raise `exc(message)` unless condition holds"""
    if not condition:
        raise exc(message)
