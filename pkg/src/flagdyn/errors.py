"""Exception types shared across the package."""


class FlagdynError(Exception):
    """Base class for package errors."""


class InvalidElementError(FlagdynError):
    """Matrix fails SL(n, R) validation (shape, determinant, finiteness)."""


class NumericalRankError(FlagdynError):
    """QR factor has a numerically vanishing diagonal entry."""


class NotRegularError(FlagdynError):
    """Element is not regular: log-eigenvalue gap below tolerance."""


class ComplexSpectrumError(FlagdynError):
    """Element has eigenvalues with nonnegligible imaginary part."""


class NoConvergenceError(FlagdynError):
    """Attractor iteration did not converge to a unique fixed point."""


class UnsupportedSpaceError(FlagdynError):
    """Requested sample space is outside the supported size range."""


class NotASubgroupError(FlagdynError):
    """Subset fails closure or inverse checks."""


class CycleError(FlagdynError):
    """Two distinct control sets are mutually reachable."""


class NoRegularElementError(FlagdynError):
    """No generator word up to the search depth is regular positive."""


class FactorizationError(FlagdynError):
    """Unipotent factorization failed its pattern or reconstruction check."""
