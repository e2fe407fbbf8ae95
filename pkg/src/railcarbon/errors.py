"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class RailCarbonError(Exception):
    """Base class for all toolkit errors."""


# -- input parsing -----------------------------------------------------------


class InputError(RailCarbonError):
    """Problem with an input file, always located by file and line."""

    def __init__(self, file: str, line: int | None, reason: str):
        self.file = file
        self.line = line
        self.reason = reason
        where = f"{file}:{line}" if line is not None else file
        super().__init__(f"{where}: {reason}")


class MalformedRow(InputError):
    pass


class DanglingReference(InputError):
    pass


class DuplicateKey(InputError):
    pass


class NegativeRate(InputError):
    pass


class ConfigError(RailCarbonError):
    pass


# -- panel construction ------------------------------------------------------


class EmptyStationSet(RailCarbonError):
    pass


class TooFewReadings(RailCarbonError):
    pass


class NonMonotone(RailCarbonError):
    pass


class EmptyPanel(RailCarbonError):
    pass


# -- emissions ---------------------------------------------------------------


class NonPositiveWeight(RailCarbonError):
    pass


class MissingCurbWeight(RailCarbonError):
    pass


class NoFactorAvailable(RailCarbonError):
    pass


class NegativeVmt(RailCarbonError):
    pass


# -- statistics --------------------------------------------------------------


class EmptyInput(RailCarbonError):
    pass


class NonPositiveDf(RailCarbonError):
    pass


class DegenerateVariance(RailCarbonError):
    pass


class TooFewRows(RailCarbonError):
    pass


class RankDeficient(RailCarbonError):
    def __init__(self, column: int, name: str | None = None):
        self.column = column
        self.name = name
        label = f"{column} ({name})" if name else str(column)
        super().__init__(f"design matrix is rank deficient at column {label}")


# -- evaluation --------------------------------------------------------------


class AllRowsDropped(RailCarbonError):
    pass


class EmptyGroup(RailCarbonError):
    pass


# -- life-cycle accounting ---------------------------------------------------


class NegativeInput(RailCarbonError):
    pass


class ZeroOperational(RailCarbonError):
    pass


class NegativeTrips(RailCarbonError):
    pass


class ZeroDenominator(RailCarbonError):
    pass


# -- simulation --------------------------------------------------------------


class InfeasibleTarget(RailCarbonError):
    pass
