"""Exception types shared across the package."""


class GradflowError(Exception):
    """Base class for all package errors."""


class DimensionError(GradflowError, ValueError):
    """Operands have inconsistent shapes."""


class PreconditionError(GradflowError, ValueError):
    """An argument violates a documented precondition."""


class StabilityError(GradflowError, ValueError):
    """A system matrix fails the Hurwitz requirement."""


class SingularMatrixError(GradflowError, ValueError):
    """A matrix required to be invertible is singular."""


class ConvexityError(GradflowError, ValueError):
    """A cost fails the strong-convexity requirement."""


class ConvergenceError(GradflowError, RuntimeError):
    """An iterative solver hit its iteration cap before the tolerance."""


class RankError(GradflowError, ValueError):
    """A regression design matrix is rank-deficient where full rank is required."""


class EstimatorStateError(GradflowError, RuntimeError):
    """A recursive estimator's internal state became invalid; re-initialize."""


class DivergenceError(GradflowError, RuntimeError):
    """The integrated state became non-finite."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class DegenerateCouplingError(GradflowError, ValueError):
    """The output-coupling term is zero, so the splitting ratio is undefined."""


class CertificateInvalidError(GradflowError, ValueError):
    """The decay rate is non-positive, so the error envelope does not exist."""


class ConfigError(GradflowError, ValueError):
    """Configuration file failed validation; carries every detected problem."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in self.problems))
