"""Exception hierarchy shared across the package."""


class RelicError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(RelicError):
    """The caller violated a documented precondition (CLI exit code 2)."""


class ParseError(RelicError):
    """Malformed input text (fact files, DLAB grammars, constraint files)."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class BiasError(RelicError):
    """A structurally invalid DLAB grammar (e.g. min > max)."""


class InternalError(RelicError):
    """An invariant the package maintains internally was broken."""
