"""Exception hierarchy.

``ConfigError`` covers bad usage or configuration (CLI exit code 1);
``DataError`` covers anything wrong with the evaluated data (exit code 2).
"""


class PerfsumError(Exception):
    pass


class ConfigError(PerfsumError, ValueError):
    pass


class DataError(PerfsumError, ValueError):
    pass


class InvalidIndicatorError(ConfigError):
    """An indicator name or (A, B) expression does not describe a valid indicator."""


class ZeroTotalError(DataError):
    pass


class MissingIndicatorError(DataError):
    pass


class MissingSizeError(DataError):
    pass


class MissingCategoryError(DataError):
    pass


class AllZeroWeightsError(DataError):
    pass


class WeightMismatchError(DataError):
    pass


class UndefinedIndicatorError(DataError):
    pass


class NoDefinedValuesError(DataError):
    pass


class EmptyInputError(DataError):
    pass


class InvalidPriorError(DataError):
    pass


class ZeroPrecisionError(DataError):
    pass


class AchievabilityError(DataError):
    """A PR point lies in the unachievable region for the given prior."""


class ParseError(DataError):
    def __init__(self, line: int, reason: str, path: str | None = None):
        self.line = line
        self.reason = reason
        self.path = path
        where = f"{path}:{line}" if path else f"line {line}"
        super().__init__(f"{where}: {reason}")


class SchemaError(DataError):
    pass


class DomainError(DataError):
    pass


class DimensionMismatchError(DataError):
    pass


class UnmappedLabelError(DataError):
    def __init__(self, value: int, position: tuple[int, ...]):
        self.value = value
        self.position = position
        super().__init__(f"ground-truth value {value} at {position} is not covered by the label mapping")


class WeightNormalizationWarning(UserWarning):
    """Explicit weights did not sum to one and were rescaled."""
