"""Exception types shared across the package."""


class SoftpackError(Exception):
    """Base class for all package errors."""


class MalformedRegionError(SoftpackError):
    """A region boundary is open, empty where it must not be, or degenerate."""


class BodyError(SoftpackError):
    """Invalid convex body data (asymmetry, non-convexity, bad samples)."""


class DegeneratePairError(SoftpackError):
    """Operation on coincident or otherwise degenerate point pairs."""


class ConstraintViolationError(SoftpackError):
    """Input violates a documented precondition (e.g. generator gauge < 2)."""


class InvalidPackingError(SoftpackError):
    """A lattice basis does not produce a valid packing."""


class ParameterError(SoftpackError):
    """Scalar parameter outside its documented range."""


class ConvergenceError(SoftpackError):
    """An iterative solve failed to reach its tolerance."""
