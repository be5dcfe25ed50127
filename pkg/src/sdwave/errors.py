"""Exception hierarchy. The CLI maps these onto its exit-code contract."""


class SdwaveError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(SdwaveError):
    """Malformed or incomplete configuration (CLI exit code 1)."""


class ModelInvalidError(SdwaveError):
    """Model ingredients violate a structural requirement (CLI exit code 2)."""


class VerificationError(SdwaveError):
    """A stored result failed re-verification (CLI exit code 3)."""


class NonconvergenceError(SdwaveError):
    """Iteration budget exhausted (CLI exit code 4).

    Carries the per-iteration sup-difference trace for diagnostics.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class NoRootsError(SdwaveError):
    """Requested speed is at or below the threshold speed: no decay roots."""


class SchemeError(SdwaveError):
    """Numerical scheme failure (instability or invariant band violation)."""
