"""Exception hierarchy.

``InputError`` covers anything wrong with what the user handed us (files,
formats, mismatched schemas); the CLI maps it to exit code 2.  Every other
``ExprCloneError`` is a numeric or stage failure (exit code 3).
"""


class ExprCloneError(Exception):
    pass


class InputError(ExprCloneError, ValueError):
    pass


class ParseError(InputError):
    pass


class SchemaError(InputError):
    pass


class DimensionError(InputError):
    pass


class TriangulationError(ExprCloneError, ValueError):
    pass


class DegenerateTriangleError(ExprCloneError, ValueError):
    pass


class DegenerateOrganError(ExprCloneError, ValueError):
    def __init__(self, organ, message):
        super().__init__(f"{organ}: {message}")
        self.organ = organ


class DegenerateTrainingError(ExprCloneError, ValueError):
    pass


class StageError(ExprCloneError):
    """Wraps a failure with the name of the pipeline stage that raised it."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause

    @property
    def is_input_error(self):
        return isinstance(self.cause, (InputError, OSError))
