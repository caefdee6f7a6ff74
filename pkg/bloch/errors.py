"""Exception hierarchy shared by the bloch library and the runner CLI."""


class BlochError(ValueError):
    """Base class for invalid inputs to any bloch operation."""
    pass


class DimensionError(BlochError):
    """Raised when matrix or vector dimensions do not line up."""
    pass


class NotHermitianError(BlochError):
    """Raised when a matrix expected to be Hermitian is not, within tolerance."""
    pass


class BasisError(BlochError):
    """Raised for malformed generator bases, orthonormal sets or permutations."""
    pass


class StateError(BlochError):
    """Raised when a matrix or vector does not describe a valid operator-state."""
    pass


class DegenerateSpectrumError(BlochError):
    """Raised when an observable has repeated eigenvalues."""
    pass


class WeightError(BlochError):
    """Raised when convex weights are negative or do not sum to one."""
    pass
