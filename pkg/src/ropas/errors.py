"""Exception types shared across the package."""


class RopasError(Exception):
    """Base class for all package-specific errors."""


class SizeLimitError(RopasError):
    """A search or enumeration space exceeds the configured cap."""


class EvaluationError(RopasError):
    """A specification could not be evaluated.

    Raised when a required input value is missing (the message names the
    variable), a lookup table has no entry for the input tuple, or a computed
    value falls outside the output variable's domain.
    """


class DefinitionError(RopasError):
    """An object was constructed with arguments that violate its contract."""
