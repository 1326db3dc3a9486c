"""Exception types raised across the package."""


class QaoaConjectureError(Exception):
    """Base class for every error raised by this package."""


class InfeasibleModel(QaoaConjectureError, ValueError):
    pass


class ConnectivityExhausted(QaoaConjectureError):
    pass


class TooLarge(QaoaConjectureError, ValueError):
    pass


class ParseError(QaoaConjectureError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class SelfLoop(ParseError):
    pass


class LengthMismatch(QaoaConjectureError, ValueError):
    pass


class InvalidParams(QaoaConjectureError, ValueError):
    pass


class InvalidInit(QaoaConjectureError, ValueError):
    pass


class NoEdges(QaoaConjectureError, ValueError):
    pass


class UndefinedFeature(QaoaConjectureError, KeyError):
    pass


class MissingColumn(QaoaConjectureError, KeyError):
    pass


class NoViolations(QaoaConjectureError, ValueError):
    pass


class Rejected(QaoaConjectureError):
    """A template could not be turned into a valid conjecture."""

    def __init__(self, reason):
        self.reason = reason
        super().__init__(reason)


class ConfigError(QaoaConjectureError, ValueError):
    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
