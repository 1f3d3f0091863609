"""Exception types shared across the package."""


class QedgeError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(QedgeError, ValueError):
    """An argument violates a documented precondition."""


class ValidationError(QedgeError, ValueError):
    """A data structure violates its invariants."""


class ParseError(QedgeError, ValueError):
    """A serialized document is malformed; message names the offending field."""


class GenerationError(QedgeError, RuntimeError):
    """Instance generation failed (e.g. a disconnected area/EN pair)."""


class CapacityError(QedgeError, RuntimeError):
    """Problem size exceeds what the selected method supports."""
