"""Exception hierarchy shared by all modules."""


class TreewidthError(Exception):
    """Base class for every error raised by this package."""


class DomainError(TreewidthError, ValueError):
    """An argument lies outside the domain of an operation."""


class InfeasibleError(TreewidthError):
    """No admissible solution exists, or none was found within the budget.

    ``best`` optionally carries the best (infeasible) state seen.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConstructionError(TreewidthError):
    """A mesh construction produced inconsistent gluing data."""


class ValidationError(TreewidthError):
    """A mesh failed validation."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class UnreachableError(TreewidthError):
    """Two vertices lie in different connected components."""


class HomologyError(TreewidthError):
    """A cycle is not null-homologous, or a loop system is not independent."""


class SizeError(TreewidthError):
    """Input exceeds a hard size cap of an exhaustive method."""


class ShellingError(TreewidthError):
    """No shelling order was found for a cell complex."""
