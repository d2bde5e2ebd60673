"""Exception types shared across the package.

The CLI maps these onto exit codes: ValidationError -> 1,
NumericalError -> 2, IOFormatError -> 3.
"""


class MultiduffError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(MultiduffError, ValueError):
    """Invalid configuration, argument, or input data."""


class ConfigError(ValidationError):
    """Config file failed schema validation.

    `key_path` names the offending key (dotted path) when known.
    """

    def __init__(self, message, key_path=None):
        self.key_path = key_path
        if key_path is not None:
            message = f"{key_path}: {message}"
        super().__init__(message)


class UnitMismatchError(ValidationError):
    """Polynomials with incompatible unit tags were added."""


class NonPrincipalAxesError(ValidationError):
    """The potential has mixed quadratic terms; the per-axis model
    assumes principal-axis-aligned coordinates."""


class ZeroAmplitudeError(ValidationError):
    """Slow-flow phase is undefined at zero amplitude under nonzero drive."""


class FitDataError(ValidationError):
    """Measurement data cannot support the requested fit."""


class NumericalError(MultiduffError, RuntimeError):
    """A computation failed to produce a usable result."""


class NonConvergenceError(NumericalError):
    """Iteration exceeded its budget without meeting tolerance."""


class SaddlePointError(NumericalError):
    """Stationary point has a non-positive-definite Hessian."""


class NonConfiningAxisError(NumericalError):
    """Requested axis has no restoring force (omega0**2 <= 0)."""


class StiffnessError(NumericalError):
    """Adaptive step size underflowed.

    `time` is the integration time at which the failure occurred.
    """

    def __init__(self, message, time):
        self.time = time
        super().__init__(f"{message} (t = {time:.6e} s)")


class SweepAborted(NumericalError):
    """A sweep step failed to integrate.

    `records` holds the completed steps, `freq_hz` the failing one.
    """

    def __init__(self, message, records, freq_hz, cause=None):
        self.records = records
        self.freq_hz = freq_hz
        self.cause = cause
        super().__init__(f"{message} at drive frequency {freq_hz} Hz")


class FitError(NumericalError):
    """Least-squares fit did not converge or was degenerate."""


class IOFormatError(MultiduffError):
    """A data file is missing, unreadable, or malformed."""
