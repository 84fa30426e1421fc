"""Exception types shared across the package."""


class InvalidRangeError(ValueError):
    """Grid or parameter range preconditions violated."""


class LengthMismatchError(ValueError):
    """Sample array does not match the grid size."""


class NoConvergenceError(RuntimeError):
    """Iterative solver exhausted its budget; carries the last residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InfeasibleError(ValueError):
    """Constraint set is empty (e.g. trace target exceeds capacity)."""


class DegenerateInputError(ValueError):
    """Input is degenerate for the requested quantity (e.g. D(f) = 0)."""


class WindowError(ValueError):
    """Requested radius window lies outside the grid."""


class CollarResolutionError(ValueError):
    """Cutoff collar contains too few grid nodes to be trustworthy."""


class PartitionError(ValueError):
    """Quadratic partition of unity does not sum to one."""


class InadmissibleTrialError(ValueError):
    """Trial state violates the admissibility constraints of a comparison."""


class EigFailureError(RuntimeError):
    """Eigendecomposition produced eigenvalues outside tolerances."""
