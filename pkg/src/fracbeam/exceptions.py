"""Exception types raised by fracbeam."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class SingularMatrixError(ArithmeticError):
    """A pivot vanished during band factorization."""


class ConvergenceError(RuntimeError):
    """An iterative or adaptive procedure failed to reach its tolerance."""


class ReconstructionError(ArithmeticError):
    """Nodal derivative data cannot be recovered from a solution level."""


class ManufacturedResidualError(AssertionError):
    """A manufactured forcing does not satisfy its PDE to tolerance."""
