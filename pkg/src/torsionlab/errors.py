"""Exception types shared across the package."""


class TorsionLabError(Exception):
    """Base class for all package errors."""


class InvalidDomainError(TorsionLabError, ValueError):
    """Input polygon or shape parameters violate a construction invariant."""


class SamplingError(TorsionLabError, RuntimeError):
    """Random shape generation exhausted its retry budget."""


class MeshResourceError(TorsionLabError, RuntimeError):
    """Requested mesh would exceed the node budget, or meshing failed."""


class ConvergenceError(TorsionLabError, RuntimeError):
    """Nonlinear solve did not converge; carries the last iterate.

    The partial solution (with converged=False) is attached so callers can
    inspect the iterate and the energy trace.
    """

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution
