"""Exception hierarchy shared by every gaugesets module."""


class GaugeSetsError(Exception):
    """Base class for all errors raised by gaugesets."""


class DomainError(GaugeSetsError, ValueError):
    """An input lies outside the domain of an operation."""


class PreconditionError(GaugeSetsError, ValueError):
    pass


class DegenerateError(GaugeSetsError):
    """A geometric construction degenerates (e.g. a cone covering the plane)."""


class SingularMatrixError(GaugeSetsError, ValueError):
    pass


class NotPositiveDefiniteError(GaugeSetsError, ValueError):
    pass


class UnknownAtomError(GaugeSetsError, KeyError):
    pass


class FormatError(GaugeSetsError, ValueError):
    """Malformed tabular or JSON input."""


class MissingHRepError(GaugeSetsError):
    """An intersection needs half-space data that is not available (d >= 3)."""


class SizeLimitError(GaugeSetsError, ValueError):
    pass


class UnsupportedGauge(GaugeSetsError, ValueError):
    pass


class GaugeSpecError(GaugeSetsError, ValueError):
    """Unparseable gauge specification string."""

    def __init__(self, message, token=None):
        super().__init__(message)
        self.token = token


class SchemaError(GaugeSetsError, ValueError):
    """A scenario or region document violates the published schema."""
