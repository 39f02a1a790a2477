"""Exception hierarchy shared by all modules."""


class NomaCacheError(Exception):
    """Base class for every error raised by this package."""


class DomainError(NomaCacheError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class InfeasibleError(NomaCacheError):
    """A constraint family admits no solution.

    ``code`` is a stable machine-readable identifier used by the CLI.
    """

    code = "Infeasible"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class MulticastInfeasible(InfeasibleError):
    code = "MulticastInfeasible"


class RateInfeasible(InfeasibleError):
    code = "RateInfeasible"


class BackhaulInfeasible(InfeasibleError):
    code = "BackhaulInfeasible"
