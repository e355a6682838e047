"""Exception hierarchy shared by all modules."""


class SquadError(Exception):
    """Base class for every error raised by this package."""

    #: exit code used by the command-line front end
    exit_code = 2


class DataError(SquadError):
    exit_code = 2


class EmptyMatrix(DataError):
    pass


class TooFewPoints(DataError):
    pass


class NonFinite(DataError):
    def __init__(self, row, col):
        super().__init__(f"non-finite value at row {row}, column {col}")
        self.row = row
        self.col = col


class DegenerateData(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class RowCountMismatch(DataError):
    pass


class TooLarge(DataError):
    """Raised by the O(N^2) and O(N^4) evaluators above their size guard."""


class IoError(DataError):
    """A file could not be opened, read or written."""


class ParseError(DataError):
    def __init__(self, line, col, message="cannot parse value"):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


class RaggedRows(DataError):
    def __init__(self, line, expected, found):
        super().__init__(f"line {line}: expected {expected} fields, found {found}")
        self.line = line
        self.expected = expected
        self.found = found


class ConfigError(SquadError):
    exit_code = 1


class NumericalError(SquadError):
    exit_code = 3


class NonFiniteUpdate(NumericalError):
    def __init__(self, iteration):
        super().__init__(f"non-finite coordinates after iteration {iteration}")
        self.iteration = iteration


class BisectionFailure(NumericalError):
    pass
