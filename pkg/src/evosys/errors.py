"""Exception types shared across the package."""


class EvosysError(Exception):
    """Base class for package errors."""


class ConfigError(EvosysError):
    """Malformed or incomplete run configuration."""


class CertificateError(EvosysError):
    """A check was invoked without the hypothesis certificate it requires,
    or certification failed with a witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SolveError(EvosysError):
    """Linear solve failure during time stepping; carries the step time."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t
