"""Exception hierarchy shared across the package."""


class DSoMError(Exception):
    """Base class for all errors raised by dsom."""


class InvalidArgumentError(DSoMError, ValueError):
    """A caller-supplied value violates a precondition."""


class DegenerateDataError(DSoMError):
    """The data cannot support the requested computation (e.g. singular covariance)."""


class ParseError(DSoMError, ValueError):
    """A file could not be parsed."""

    def __init__(self, message, *, path=None, line=None, column=None):
        self.path = path
        self.line = line
        self.column = column
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{': '.join([', '.join(where), message]) if where else message}")


class SchemaError(ParseError):
    """A file parses but lacks required fields."""


class UnsupportedFormatError(ParseError):
    """The file uses a format variant this package does not read."""
