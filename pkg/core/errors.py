"""
core/errors.py

Exception hierarchy shared by the core modules and the CLI.

Everything raised on purpose derives from GaussVDError so the command layer can
map it to an exit code with a single except clause. Most classes also derive
from ValueError because they describe bad input rather than a broken program.
"""
from typing import Any, Sequence


class GaussVDError(Exception):
    """Base class for all errors raised by gaussvd."""


class ZeroPolynomialError(GaussVDError, ValueError):
    """A nonzero Laurent polynomial was required."""


class BoundaryAmbiguityError(GaussVDError, ValueError):
    """A root lies too close to an annulus boundary to be classified (strict mode)."""

    def __init__(self, message: str, roots: Sequence[Any] = ()):
        super().__init__(message)
        self.roots = list(roots)


class DimensionMismatchError(GaussVDError, ValueError):
    pass


class InvalidIndexError(GaussVDError, ValueError):
    pass


class EnumerationCapError(GaussVDError, ValueError):
    """Subset enumeration would exceed the configured cap."""


class PositionError(GaussVDError, ValueError):
    """The hyperplane configuration does not satisfy a position requirement."""


class HypothesisError(GaussVDError, ValueError):
    """A theorem hypothesis (q > 2N-k+1, 1 <= k, ...) is violated."""


class InfeasibleError(GaussVDError):
    """The Nochka weight program has no solution."""


class DegenerateCurveError(GaussVDError, ValueError):
    """The curve is linearly degenerate (top Wronskian vanishes identically)."""


class SingularPointError(GaussVDError, ValueError):
    """Evaluation was requested at a zero of a density factor."""


class TheoremSatisfiedError(GaussVDError):
    """The inequality already holds; there is no contradiction metric to build."""


class InternalConsistencyError(GaussVDError):
    """A relation that must hold by construction failed."""


class ConfigError(GaussVDError, ValueError):
    """The JSON configuration is malformed."""


class RationalParseError(ConfigError):
    """A rational string could not be parsed; `position` is the offending character index."""

    def __init__(self, message: str, text: str = "", position: int = 0):
        super().__init__(message)
        self.text = text
        self.position = position
