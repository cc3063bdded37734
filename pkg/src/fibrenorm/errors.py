"""Exception types shared across the package."""


class FibrenormError(Exception):
    """Base class."""


class CombinatoricsError(FibrenormError):
    """The orbit data do not have golden-mean (Fibonacci) combinatorics."""


class BracketError(FibrenormError):
    """A bisection bracket is invalid or lost its sign change."""


class PrecisionError(FibrenormError):
    """The working precision is exhausted at the requested depth."""


class ConvergenceError(FibrenormError):
    """An iterative solver failed to converge."""


class DomainError(FibrenormError):
    """A point left the domain where a map is defined or represented."""
