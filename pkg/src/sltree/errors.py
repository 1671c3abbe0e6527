"""Exception types shared across the package."""


class SltreeError(Exception):
    """Base class for all package errors."""


class TreeStructureError(SltreeError):
    """Raised when an operation's structural precondition fails (bad vertex, bad edge)."""


class IntegrationError(SltreeError):
    """ODE integration failure; carries the spectral parameter and position reached."""

    def __init__(self, message, lam=None, x=None):
        super().__init__(message)
        self.lam = lam
        self.x = x


class PoleProximityError(SltreeError):
    """A requested grid point is too close to a pole of a Weyl function."""

    def __init__(self, message, points=()):
        super().__init__(message)
        self.points = tuple(points)


class CertificationError(SltreeError):
    """Eigenvalue search could not certify a zero count on some subinterval."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class PairingError(SltreeError):
    """Spectra could not be paired for the product reconstruction."""

    def __init__(self, message, window=None):
        super().__init__(message)
        self.window = window


class TrackingError(SltreeError):
    """Quadratic root tracking failed (root collision or cross-check mismatch)."""


class FitError(SltreeError):
    """Potential recovery optimizer stagnated above tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class PipelineError(SltreeError):
    """Stage-tagged failure of the partial-inverse pipeline."""

    def __init__(self, stage, message, cause=None):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.cause = cause
