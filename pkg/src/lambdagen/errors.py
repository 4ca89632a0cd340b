"""Exception hierarchy shared by the samplers and the CLI."""


class LambdaGenError(Exception):
    """Base class for all library errors."""


class TermParseError(LambdaGenError, ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class SingularityExceeded(LambdaGenError, ArithmeticError):
    """The evaluation point lies at or beyond the dominant singularity."""


class NoConvergence(LambdaGenError, ArithmeticError):
    pass


class DegenerateTarget(LambdaGenError, ValueError):
    pass


class EmptySizeClass(LambdaGenError, ValueError):
    pass


class TruncationExceeded(LambdaGenError, ValueError):
    pass


class SizeGuardExceeded(LambdaGenError, ValueError):
    pass


class AttemptsExhausted(LambdaGenError, RuntimeError):
    def __init__(self, attempts: int, message: str = ""):
        super().__init__(message or f"no acceptable sample after {attempts} attempts")
        self.attempts = attempts


class Infeasible(LambdaGenError, ValueError):
    """Requested tuning targets cannot be met."""


class OpenTermRejected(LambdaGenError, ValueError):
    pass
