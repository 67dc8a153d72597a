"""Exception hierarchy shared by all modules."""


class SearchStopError(Exception):
    """Base class for every error raised by this package."""


class CycleDetected(SearchStopError):
    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        super().__init__("edges contain a directed cycle: " + " -> ".join(map(str, self.cycle)))


class InvalidVertexLabel(SearchStopError):
    pass


class InstanceTooLarge(SearchStopError):
    pass


class DimensionMismatch(SearchStopError):
    pass


class NonTrueParameters(SearchStopError):
    pass


class NotEdgeless(SearchStopError):
    pass


class StrategyUnavailable(SearchStopError):
    pass


class LengthMismatch(SearchStopError):
    pass


class MaxRoundsExceeded(SearchStopError):
    pass


class InvalidParameters(SearchStopError):
    pass


class ConfigError(SearchStopError):
    """Bad experiment configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
