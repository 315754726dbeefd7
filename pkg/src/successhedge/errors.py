"""Exception hierarchy shared by all modules."""


class HedgeError(ValueError):
    """Base class for every error raised by the package."""


class DomainError(HedgeError):
    """An input lies outside the mathematical domain of an operation."""


class ArbitrageError(DomainError):
    """Lattice factors violate ``0 < d < 1 + rho < u``."""


class CapacityError(HedgeError):
    """A configured size cap (steps, paths, scenarios, candidates) was exceeded."""


class MembershipError(DomainError):
    """A level process ``K`` is not attainable by ``M`` on some market path."""


class ConfigError(HedgeError):
    """A run configuration could not be parsed or is structurally invalid."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
