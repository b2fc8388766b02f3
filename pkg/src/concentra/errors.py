"""Exception types shared across the package."""


class ConcentraError(Exception):
    """Base class for all package-specific errors."""


class EnumerationTooLargeError(ConcentraError):
    """Raised when an exact operation would enumerate more configurations than the cap."""


class UndefinedConditionalError(ConcentraError):
    """Raised when a conditional is requested at a section of zero marginal mass."""


class DomainError(ConcentraError, ValueError):
    """Raised when an argument lies outside an operation's domain."""


class DimensionMismatchError(ConcentraError, ValueError):
    """Raised when a function specification does not match the space it is evaluated on."""


class UndefinedRatioError(ConcentraError):
    """Raised when an LSI ratio is requested for a function that is constant on the support."""


class SchemaError(ConcentraError, ValueError):
    """Raised when a JSON document does not validate against the expected schema."""
