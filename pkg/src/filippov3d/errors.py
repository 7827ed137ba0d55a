"""Exception hierarchy shared by every analysis stage."""


class Filippov3dError(Exception):
    """Base class for all toolkit errors."""


class ExpressionSyntaxError(Filippov3dError):
    """Raised when an expression string does not conform to the grammar.

    Carries the 0-based character position of the offending token.
    """

    def __init__(self, message, text, position):
        self.text = text
        self.position = position
        caret = " " * position + "^"
        super().__init__(f"{message} at position {position}:\n  {text}\n  {caret}")


class UnknownIdentifierError(ExpressionSyntaxError):
    pass


class ArityError(Filippov3dError):
    """Scalar expression supplied where a vector was required, or vice versa."""


class EvaluationDomainError(Filippov3dError):
    """Evaluation produced NaN/Inf; never returned silently."""

    def __init__(self, message, point=None):
        self.point = None if point is None else tuple(float(c) for c in point)
        if self.point is not None:
            message = f"{message} at point {self.point}"
        super().__init__(message)


class RegularityError(Filippov3dError):
    """|grad f| fell below the configured floor where it must not."""


class ConvergenceError(Filippov3dError):
    """Newton iteration / continuation / integration failed to converge."""


class DegenerateTangencyError(Filippov3dError):
    """Rank drop or sign ambiguity that forbids classification."""


class PreconditionError(Filippov3dError):
    """An operation was invoked outside its documented precondition."""


class StageFailure(Filippov3dError):
    """A pipeline stage aborted; carries the stage name."""

    def __init__(self, stage, message):
        self.stage = stage
        super().__init__(f"stage '{stage}' failed: {message}")
