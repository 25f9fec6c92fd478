"""Exception hierarchy shared by the simulator modules."""


class QBatteryError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(QBatteryError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateGapError(DomainError):
    """The instantaneous spectral gap vanished."""


class BasisError(DomainError):
    """A density matrix was supplied in the wrong basis."""


class IntegrationError(QBatteryError, RuntimeError):
    """The master-equation integration failed its constraint checks.

    ``diagnostics`` carries the step count and constraint violations of the
    last attempt.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class OutputError(QBatteryError, OSError):
    """Writing results failed; the message names the path."""
