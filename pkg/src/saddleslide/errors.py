"""Exception types shared across the library."""


class SaddleSlideError(Exception):
    """Base class for all errors raised by this library."""


class DimensionMismatch(SaddleSlideError):
    """Vector lengths do not match each other or the owning problem."""


class NonPositiveModulus(SaddleSlideError):
    """A strong convexity/concavity modulus is not strictly positive."""


class InconsistentConstants(SaddleSlideError):
    """Declared smoothness constants contradict each other."""


class NonPositiveStep(SaddleSlideError):
    """A step size or weight that must be positive is not."""


class NonPositiveInput(SaddleSlideError):
    """A scalar input that must be positive is not."""


class MissingValueOracle(SaddleSlideError):
    """A diagnostic needs function values but no value oracle was supplied."""


class DivergenceDetected(SaddleSlideError):
    """Iterates became non-finite or moved away from a known solution."""


class InnerBudgetExhausted(SaddleSlideError):
    """The subproblem solver hit its iteration cap before acceptance."""


class BudgetExhausted(SaddleSlideError):
    """An iterative routine hit its iteration cap before reaching tolerance."""


class CaseMismatch(SaddleSlideError):
    """A regularization plan was applied to a problem of the wrong kind."""


class InfeasibleTarget(SaddleSlideError):
    """The constraint residual failed to shrink to the requested level."""


class InfeasibleConstants(SaddleSlideError):
    """Requested generator constants cannot be realized."""


class SingularSystem(SaddleSlideError):
    """A reference linear system could not be solved reliably."""


class ManifestError(SaddleSlideError):
    """An instance manifest is malformed or inconsistent with its data."""
