"""Exception types shared across the toolkit."""


class DetourkitError(Exception):
    """Base class for all toolkit errors."""


class InvalidShapeError(DetourkitError):
    """Shape data is degenerate or inconsistent (e.g. polygon with < 3 vertices)."""


class EmptySetError(DetourkitError):
    """An operation requiring a non-empty point set received an empty one."""


class ResourceLimitError(DetourkitError):
    """A requested refinement level exceeds the configured resource guard."""


class IllConditionedError(DetourkitError):
    """A tangency system is numerically ill conditioned or its inputs invalid."""


class ExceptionalLineError(DetourkitError):
    """The line passes within tolerance of a vertex or tangency point."""


class ResolutionError(DetourkitError):
    """The requested tolerance is below what the generated structure resolves."""


class UncoveredPointError(DetourkitError):
    """A query point lies outside every accepted cube of the decomposition."""


class OracleError(DetourkitError):
    """The domain oracle returned inconsistent inside/distance answers."""


class MissingFitError(DetourkitError):
    """A certificate that requires a quasihyperbolic growth fit got none."""
