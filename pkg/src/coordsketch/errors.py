"""Exception types shared across the package."""


class SketchError(Exception):
    """Base class for all errors raised by coordsketch."""


class ParameterError(SketchError, ValueError):
    """An argument is outside its valid domain (k = 0, negative weight, ...)."""


class DimensionError(SketchError, ValueError):
    """Operand shapes are incompatible."""


class CoordinationError(SketchError):
    """Two sketches cannot be combined (different seed, kind, or k)."""


class MatrixParseError(SketchError, ValueError):
    """A matrix file could not be parsed."""

    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


class SketchFormatError(SketchError, ValueError):
    """A serialized sketch file is malformed or has an unknown version."""
