"""Exception hierarchy shared across the package."""


class DispeqError(Exception):
    """Base class for all package errors."""


class DomainError(DispeqError, ValueError):
    """A material model was evaluated where its index is not real-positive."""


class CutoffError(DomainError):
    """A guided mode was evaluated below its cutoff frequency."""

    def __init__(self, message, cutoff=None):
        super().__init__(message)
        self.cutoff = cutoff


class NoRootError(DispeqError):
    """A bracketed scalar root-find found no sign change."""


class DegenerateCurvatureError(NoRootError):
    """The curvature being root-found vanishes identically on the bracket."""


class QuadratureError(DispeqError):
    """Adaptive quadrature did not reach the requested tolerance."""


class ConvergenceError(DispeqError):
    """An iterative solver exhausted its budget without converging."""


class OrderingError(DispeqError):
    """A solved frequency fell outside the admissible ordering window."""


class InfeasibleError(DispeqError):
    """The constraint set cannot be met with positive lengths."""


class DegenerateSystemError(DispeqError):
    """The Jacobian is rank-deficient at every converged point."""


class DetNotUnimodular(DispeqError):
    """|det T| deviates from one beyond tolerance."""


class BranchError(DispeqError):
    """Eigenphase tracking cannot resolve the logarithm branch."""


class AliasError(DispeqError):
    """Pulse energy reached the edge of the time window."""


class ConfigError(DispeqError):
    """Configuration failed schema or unit validation."""
