"""Exception hierarchy shared by every module of the package."""


class OTGrowthError(Exception):
    """Base class for all package errors."""


class DomainError(OTGrowthError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(OTGrowthError, ValueError):
    """A model or scenario is declared inconsistently."""


class UnboundedInverseError(DomainError):
    """A decreasing function never drops below the requested level."""


class UnsupportedConstantError(OTGrowthError):
    """A constant exists in theory but has no numeric formula."""


class FormulaDegenerateError(DomainError):
    """A closed-form bound is undefined for the given parameters."""


class InfeasibleDriftError(DomainError):
    """The Lyapunov drift inequality cannot hold for the requested exponent."""


class GridTruncationError(DomainError):
    """A 1D grid reaches probability levels the quantile solver cannot resolve."""


class SolverError(OTGrowthError, RuntimeError):
    """A numerical solver failed to converge."""


class EpsilonTooSmallError(SolverError):
    """Entropic regularization too small for a finite log-domain kernel."""


class DegenerateRowError(DomainError):
    """A coupling row carries no mass."""


class DirectionUndefinedError(DomainError):
    """The anchor image is the origin, so T(x)/|T(x)| is undefined."""


class GateFailure(OTGrowthError):
    """A declared hypothesis failed numerical verification."""

    def __init__(self, reason, details=None):
        super().__init__(reason)
        self.reason = reason
        self.details = details or {}
