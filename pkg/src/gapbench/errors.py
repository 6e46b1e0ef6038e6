"""Exception taxonomy shared across the package."""


class GapbenchError(Exception):
    """Base class for all errors raised by this package."""


class InsufficientContext(GapbenchError):
    pass


class ParseError(GapbenchError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GridError(GapbenchError):
    pass


class DuplicateError(GapbenchError):
    pass


class TooFewValues(GapbenchError):
    pass


class InfeasiblePlan(GapbenchError):
    pass


class PlanMismatch(GapbenchError):
    pass


class PreexistingMissing(GapbenchError):
    pass


class HistoryTooShort(GapbenchError):
    pass


class EmptyHistory(GapbenchError):
    pass


class MissingEndpoint(GapbenchError):
    pass


class NonStationaryFit(GapbenchError):
    pass


class NumericalFailure(GapbenchError):
    pass


class LengthMismatch(GapbenchError):
    pass


class NonFiniteInput(GapbenchError):
    pass


class EmptyInput(GapbenchError):
    pass


class AdapterTimeout(GapbenchError):
    pass


class AdapterMalformedResponse(GapbenchError):
    pass


class AdapterCrashed(GapbenchError):
    pass


class AdapterReportedError(GapbenchError):
    """The adapter answered with a well-formed error response."""


class ConfigError(GapbenchError):
    pass
