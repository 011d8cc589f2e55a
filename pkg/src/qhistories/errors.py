"""Exception hierarchy.

Every error raised on purpose by this package derives from
:class:`QHistoriesError`, so callers (the CLI in particular) can map error
families onto exit codes without catching unrelated exceptions.
"""


class QHistoriesError(Exception):
    """Base class for all package errors."""


class DimensionError(QHistoriesError, ValueError):
    pass


class InvariantError(QHistoriesError, ValueError):
    """A value violates one of its type invariants (norm, unitarity, ...)."""


class NormalizationError(InvariantError):
    pass


class NotUnitaryError(InvariantError):
    pass


class InvalidWireError(QHistoriesError, ValueError):
    pass


class UnknownLabelError(QHistoriesError, KeyError):
    def __str__(self) -> str:
        # KeyError quotes its argument; keep the plain message.
        return str(self.args[0]) if self.args else ""


class ZeroProbabilityError(QHistoriesError, ValueError):
    """The requested outcome has probability below the zero floor."""


class HistoryLengthError(QHistoriesError, ValueError):
    """A history's length does not match the number of schedule steps."""


class ImpossibleOutcomeError(QHistoriesError, ValueError):
    """No history in a history vector is compatible with an observed outcome."""


class DegenerateOutcomeError(QHistoriesError, ValueError):
    """A scalar amplitude was requested for a rank > 1 final outcome."""


class EngineMismatchError(QHistoriesError, RuntimeError):
    """Sampling produced a history the enumerator considers impossible."""


class ParseError(QHistoriesError, ValueError):
    """Scenario file error with a 1-based line and column."""

    category = "syntax"

    def __init__(self, message: str, line: int, column: int = 1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message} [{self.category}]")


class ScenarioSyntaxError(ParseError):
    category = "syntax"


class UnknownGateError(ParseError):
    category = "unknown-gate"


class NonUnitaryGateError(ParseError):
    category = "non-unitary"


class InitNormalizationError(ParseError):
    category = "non-normalized-init"


class WireRangeError(ParseError):
    category = "wire-range"


class DuplicateWireError(ParseError):
    category = "duplicate-wire"
