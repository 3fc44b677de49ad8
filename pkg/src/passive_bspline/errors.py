"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class SingularEvaluationError(ArithmeticError):
    """Evaluation was requested at a genuine (non-cancelling) singularity."""


class PoleError(SingularEvaluationError):
    """Evaluation at the location of a point mass or a branch point."""


class NumericalFailure(RuntimeError):
    """A numerical procedure did not converge or broke down."""
