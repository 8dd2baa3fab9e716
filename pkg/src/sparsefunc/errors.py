"""Exception types shared across the package."""


class SparseFuncError(Exception):
    """Base class for all package-specific errors."""


class DimensionTooSmall(SparseFuncError):
    """The noise-level estimator needs at least 3 coordinates."""


class DimensionMismatch(SparseFuncError):
    """Two vectors that must share a dimension do not."""


class UnsupportedRegime(SparseFuncError):
    """The requested parameter regime has no defined rate or estimator."""


class NumericOverflow(SparseFuncError):
    """A divergence value exceeds the representable range even in log domain."""


class NonConstantFunctional(SparseFuncError):
    """The functional is not constant on the support of the given prior."""


class WitnessOutsideClass(SparseFuncError):
    """A supplied parameter vector fails membership in the target class."""
