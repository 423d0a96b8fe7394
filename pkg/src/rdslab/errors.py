"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so keep new errors under one of the
three branches below.
"""

from __future__ import annotations


class RdsLabError(Exception):
    """Base class for all package errors."""


class InputError(RdsLabError, ValueError):
    """Invalid argument, node id, or configuration value."""


class InfeasibleConfigError(RdsLabError):
    """A scenario cannot be realized (negative budget, p > 1, capacity...)."""


class InfeasibleAlphaError(InfeasibleConfigError):
    """Too few directed entries for the undirected allocation to fit."""

    def __init__(self, message: str, min_alpha: float):
        super().__init__(message)
        self.min_alpha = min_alpha


class DataError(RdsLabError):
    """Malformed input data (parse failures, broken files)."""


class ParseError(DataError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class DegenerateBlockError(RdsLabError, ZeroDivisionError):
    """A block ratio has a zero denominator."""


class StatsUndefinedError(RdsLabError, ZeroDivisionError):
    """A network statistic is undefined for this network."""


class DegenerateNetworkError(RdsLabError):
    """The network cannot support the requested sampler (e.g. no in-degree mass)."""


class ExhaustionError(DegenerateNetworkError):
    """Eligible sampling mass ran out before reaching the target size."""


class UndefinedWeightError(RdsLabError, ZeroDivisionError):
    """A sampled node carries a zero inclusion probability."""
