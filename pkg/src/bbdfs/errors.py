"""Exception hierarchy shared by every module of the package."""


class BBDFSError(Exception):
    """Base class for all errors raised by bbdfs."""


class InvalidOperandError(BBDFSError, ValueError):
    """Operands of incompatible shape (e.g. Pauli strings of different length)."""


class CapacityError(BBDFSError, ValueError):
    """A dense representation would exceed the configured site budget."""


class LayoutError(BBDFSError, ValueError):
    """Register layout or coupling graph violates the chain rules."""


class UnsupportedConfigurationError(BBDFSError, ValueError):
    """A configuration that is well formed but not supported."""


class ScheduleError(BBDFSError, ValueError):
    """Invalid clock, horizon or period specification."""


class AmbiguousFrameError(ScheduleError):
    """Toggling frame requested exactly at a pulse time."""


class DegenerateCouplingError(BBDFSError, ValueError):
    """Exchange constants make a logical operator undefined."""


class NonHermitianError(BBDFSError, ValueError):
    """Generator handed to the exponential is not Hermitian."""


class ConfigError(BBDFSError, ValueError):
    """Scenario file could not be parsed or validated.

    ``field`` names the offending entry in dotted form so the CLI can
    report it.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
