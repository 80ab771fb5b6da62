"""Exception hierarchy shared by all modules."""


class DomainError(ValueError):
    """Input is well-typed but violates a physical or structural contract."""


class ShapeError(DomainError):
    """Subsystem dimensions do not match the matrix or circuit they describe."""


class InvariantError(DomainError):
    """A density-matrix, circuit or diagram invariant does not hold."""


class ReconstructionError(DomainError):
    """Moments are inconsistent with a Hermitian spectrum of a partially transposed state."""


class CapacityError(DomainError):
    """A brute-force path would exceed its documented size cap."""
