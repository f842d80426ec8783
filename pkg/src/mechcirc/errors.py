"""Exception hierarchy shared across the package."""


class MechcircError(Exception):
    """Base class for all package errors."""


class DomainError(MechcircError, ValueError):
    """An argument lies outside the physical domain of a formula."""


class FitError(MechcircError):
    """A least-squares fit is ill-posed (e.g. rank-deficient design)."""


class ModelValidityError(MechcircError):
    """The requested parameters violate an assumption of the linearized model."""


class NumericalError(MechcircError):
    """A linear solve failed or was too ill-conditioned to trust."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class ConvergenceError(MechcircError):
    """Time integration did not settle to a steady state."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CalibrationError(MechcircError):
    """Calibration data produced an unphysical result."""


class ReferredNoiseOverflowError(MechcircError):
    """Input-referred noise requested on a path with vanishing gain."""


class ConfigError(MechcircError):
    """A configuration file is malformed.

    ``field`` holds the dotted key path of the offending entry when known.
    """

    def __init__(self, message, field=None, source=None):
        where = ""
        if source:
            where += f"{source}: "
        if field:
            where += f"[{field}] "
        super().__init__(where + message)
        self.field = field
        self.source = source
