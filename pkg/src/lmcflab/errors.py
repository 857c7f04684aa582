"""Exception hierarchy shared across the package."""


class LmcflabError(Exception):
    """Base class for all package errors."""


class DomainError(LmcflabError, ValueError):
    """A precondition on the mathematical input is violated."""


class ValidationError(LmcflabError, ValueError):
    """A configuration document or parameter record is malformed."""


class MeshError(LmcflabError, RuntimeError):
    """A discrete curve is degenerate or too coarse for the requested operation."""


class SingularRadiusError(LmcflabError, RuntimeError):
    """A node fell below the admissible distance from the origin."""


class NoFitError(LmcflabError, RuntimeError):
    """A model fit exceeded its hard residual cap."""


class NumericalError(LmcflabError, RuntimeError):
    """An iteration failed to converge or produced an inconsistent result."""
