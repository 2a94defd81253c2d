"""Exception hierarchy shared by all ipdp modules."""


class IPDPError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(IPDPError, ValueError):
    """Invalid configuration (grid size, smoothing parameter, ranges...)."""


class SchemaError(IPDPError, ValueError):
    """Feature vector does not match the model or dataset schema."""


class InvalidValueError(IPDPError, ValueError):
    """Non-finite or otherwise unusable numeric input."""


class InvalidLabelError(IPDPError, ValueError):
    pass


class InvalidRangeError(IPDPError, ValueError):
    pass


class InvalidQuantileError(IPDPError, ValueError):
    pass


class EmptyStoreError(IPDPError, LookupError):
    """Query on a sketch that has not seen any value yet."""


class UndefinedDebiasError(IPDPError, ValueError):
    """Debiasing requested at t = 0, where the correction factor vanishes."""


class OrderingError(IPDPError, ValueError):
    """Frames or records arrived out of time order."""


class IngestionError(IPDPError):
    """A CSV source could not be parsed.

    ``line`` is the 1-based line number in the file (the header is line 1).
    """

    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
