"""krausgadget - Custom Exceptions"""

from typing import Any, Optional, Sequence


class KrausGadgetError(Exception):
    """Base exception for all krausgadget errors."""

    pass


class CutoffConvergenceError(KrausGadgetError):
    """
    A quantity did not settle within the cutoff schedule, or a damped
    constructor lost more norm to truncation than the tolerance allows.

    Attributes:
        quantity: Name of the quantity being converged
        cutoff: Largest cutoff that was tried
        change: Last observed change (or norm deficit)
        schedule: Cutoffs that were tried
    """

    def __init__(
        self,
        quantity: str,
        cutoff: int,
        change: float,
        schedule: Optional[Sequence[int]] = None,
    ):
        self.quantity = quantity
        self.cutoff = cutoff
        self.change = change
        self.schedule = list(schedule) if schedule is not None else [cutoff]
        super().__init__(
            f"{quantity} not converged at cutoff {cutoff} (change {change:.3e}, schedule {self.schedule})"
        )


class DimensionMismatchError(KrausGadgetError):
    """Mode dimensions of two Fock objects disagree."""

    def __init__(self, expected: Any, actual: Any):
        self.expected = expected
        self.actual = actual
        super().__init__(f"dimension mismatch: expected {expected}, got {actual}")


class DegenerateAngleError(KrausGadgetError):
    """sin(theta_a - theta_b) vanishes, so V and mu are undefined."""

    def __init__(self, theta_a: float, theta_b: float):
        self.theta_a = theta_a
        self.theta_b = theta_b
        super().__init__(f"degenerate measurement angles theta_a={theta_a!r}, theta_b={theta_b!r}")


class ZeroNormError(KrausGadgetError):
    """A state or operator with zero norm was normalized or compared."""

    pass


class CodespaceWeightError(KrausGadgetError):
    """
    Logical readout attempted on a state outside the damped GKP code space.

    Attributes:
        weight: Projection weight onto span{|0>, |1>}
        threshold: Minimum accepted weight
    """

    def __init__(self, weight: float, threshold: float):
        self.weight = weight
        self.threshold = threshold
        super().__init__(f"codespace weight {weight:.4f} below threshold {threshold}")


class GridMassError(KrausGadgetError):
    """The outcome grid captures too little of the outcome distribution; widen it."""

    def __init__(self, mass: float, threshold: float):
        self.mass = mass
        self.threshold = threshold
        super().__init__(f"outcome grid holds mass {mass:.6f} < {threshold}; widen the grid")


class VanishingDensityError(KrausGadgetError):
    """Outcome has (numerically) zero probability density for the given input."""

    def __init__(self, density: float):
        self.density = density
        super().__init__(f"outcome density {density:.3e} vanishes; resample")


class UnknownIdentityError(KrausGadgetError):
    """Requested identity id is not registered."""

    def __init__(self, identity_id: str):
        self.identity_id = identity_id
        super().__init__(f"unknown identity {identity_id!r}")


class ReportSchemaError(KrausGadgetError):
    """Report or CSV file does not match its declared schema."""

    pass


class JobFailedError(KrausGadgetError):
    """
    A pooled job raised something outside the krausgadget hierarchy.

    Attributes:
        job_id: Correlation id of the failed job
        cause: The original exception
    """

    def __init__(self, job_id: str, cause: BaseException):
        self.job_id = job_id
        self.cause = cause
        super().__init__(f"job {job_id} failed: {type(cause).__name__}: {cause}")
