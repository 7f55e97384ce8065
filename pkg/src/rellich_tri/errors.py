"""Exception types raised across the package."""


class RellichTriError(Exception):
    """Base class for all package errors."""


class GeometryError(RellichTriError):
    pass


class DegenerateTriangle(GeometryError):
    pass


class NonFiniteInput(GeometryError):
    pass


class InvalidMode(RellichTriError):
    pass


class OutOfDomain(RellichTriError):
    pass


class GeometryMismatch(RellichTriError):
    pass


class RefinementTooDeep(RellichTriError):
    pass


class ConvergenceFailure(RellichTriError):
    """Eigensolver did not reach the requested residual.

    ``diagnostics`` holds per-eigenpair relative residuals and the
    iteration settings used.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ZeroVector(RellichTriError):
    pass


class SingularBoundaryMass(RellichTriError):
    pass


class MissingSide(RellichTriError):
    pass


class FrameMismatch(RellichTriError):
    pass
