"""Exception hierarchy shared across the package."""


class QreGamesError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(QreGamesError):
    """Vector or matrix sizes disagree with the declared player dimensions."""


class NonPositiveLambda(QreGamesError):
    """The noise temperature must be strictly positive."""


class IndexOutOfRange(QreGamesError):
    """An action or area index is outside its valid range."""


class NonFiniteInput(QreGamesError):
    """A cost vector or matrix contains NaN or infinity."""


class NonPositiveStrategy(QreGamesError):
    """A strategy entry is zero or negative where strict positivity is required."""


class EigendecompositionFailure(QreGamesError):
    """The symmetric eigensolver did not converge."""


class DecompositionFailure(QreGamesError):
    """SVD used for the pseudoinverse did not converge."""


class ZeroAreaTotal(QreGamesError):
    """Some area receives zero aggregate service."""


class InvalidGeometry(QreGamesError):
    """Malformed area map or home assignment."""


class InfeasibleDetected(QreGamesError):
    """Alternating projections stalled with a persistent constraint violation.

    Dykstra's method has no infeasibility certificate, so this is heuristic:
    the iterate stopped moving while some margin constraint stayed violated.
    """

    def __init__(self, message: str, max_violation: float):
        super().__init__(message)
        self.max_violation = max_violation


class InnerSolveFailure(QreGamesError):
    """The equilibrium solve inside the design loop did not converge."""


class InvalidInput(QreGamesError):
    """Malformed JSON input or command-line value."""
