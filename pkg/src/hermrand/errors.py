"""Exception types raised across the package."""


class HermRandError(Exception):
    """Base class for all package errors."""


class DomainError(HermRandError, ValueError):
    """An argument lies outside the mathematical domain of the function."""


class SearchFailed(HermRandError, RuntimeError):
    """A numerical search could not find an admissible value."""


class BudgetExceeded(HermRandError, RuntimeError):
    """The requested computation exceeds the configured mode/grid budget."""


class HTooSmall(HermRandError, ValueError):
    """A modulus-of-continuity step is below the grid resolution."""


class Degenerate(HermRandError, ValueError):
    """A fit has no spread in its abscissae."""


class ConfigError(HermRandError, ValueError):
    """An experiment configuration is malformed or inconsistent."""
