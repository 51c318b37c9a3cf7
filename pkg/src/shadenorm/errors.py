"""Exception hierarchy.

Every error raised on purpose by the library derives from ``ShadeNormError``.
The CLI maps ``ParameterError`` to a usage failure (exit 2) and everything
else to a data failure (exit 1).
"""


class ShadeNormError(Exception):
    pass


class ParameterError(ShadeNormError, ValueError):
    """Invalid scalar parameter (count, elevation, sigma, index...)."""


class StructuralError(ShadeNormError, ValueError):
    """Inputs whose shapes or lengths do not line up."""


class DomainError(ShadeNormError, ValueError):
    """Values outside the range an operation accepts."""


class EmptyInputError(ShadeNormError, ValueError):
    """Nothing left to evaluate after masking."""


class SchemaError(ShadeNormError, ValueError):
    """Malformed file or JSON document."""

    def __init__(self, message, version=None):
        if version is not None:
            message = f"{message} (schema version {version})"
        super().__init__(message)
        self.version = version
