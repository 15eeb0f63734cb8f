"""krausgadget - Sweep Specifications"""

import logging
from enum import Enum
from pathlib import Path
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..gkp_ec import ChainMode, EcVariant, SweepRow, run_sweep_point
from ..states import beta_from_db

logger = logging.getLogger(__name__)


class SweepParameter(str, Enum):
    BETA = "beta"
    SQUEEZING_DB = "squeezing_db"
    STEPS = "steps"
    THETA = "theta"


class SweepPoint(BaseModel):
    """One fully resolved point of a sweep."""

    model_config = ConfigDict(frozen=True)

    beta: float = Field(gt=0.0)
    steps: int = Field(ge=0)
    ec_period: int = Field(ge=0)
    theta_a: float
    theta_b: float


class SweepSpec(BaseModel):
    """
    EC chain sweep over one parameter with everything else held fixed.

    Attributes:
        parameter: Swept quantity
        values: Swept values; (theta_a, theta_b) pairs for THETA
        variant: EC gadget variant
        beta: Fixed damping (ignored when beta or squeezing_db is swept)
        steps: Fixed chain length
        ec_period: EC step every ec_period steps (0: plain teleportation only)
        theta_a: Fixed homodyne angle on the input wire
        theta_b: Fixed homodyne angle on the psi wire
        seeds: Number of seeds per point
        seed_offset: First seed
        mode: Correction mode
        input_qubit: Logical input (c0, c1)
        cutoff: Fock cutoff (default sized from beta)
        out: CSV destination
    """

    model_config = ConfigDict(frozen=True)

    parameter: SweepParameter
    values: list[Union[float, tuple[float, float]]] = Field(min_length=1)
    variant: EcVariant = EcVariant.AB
    beta: float = Field(default=0.05, gt=0.0)
    steps: int = Field(default=8, ge=0)
    ec_period: int = Field(default=2, ge=0)
    theta_a: float = np.pi / 2
    theta_b: float = 0.0
    seeds: int = Field(default=50, ge=1)
    seed_offset: int = Field(default=0, ge=0)
    mode: ChainMode = ChainMode.ACTIVE
    input_qubit: tuple[complex, complex] = (1.0, 1.0)
    cutoff: Optional[int] = Field(default=None, ge=2)
    out: Optional[Path] = None

    @model_validator(mode="after")
    def _check_values(self) -> "SweepSpec":
        pairs = [isinstance(v, tuple) for v in self.values]
        if self.parameter is SweepParameter.THETA:
            if not all(pairs):
                raise ValueError("theta sweeps take (theta_a, theta_b) pairs")
            return self
        if any(pairs):
            raise ValueError(f"{self.parameter.value} sweeps take scalar values")
        if self.parameter is SweepParameter.STEPS and any(float(v) != int(v) or v < 0 for v in self.values):  # type: ignore[arg-type]
            raise ValueError("steps must be non-negative integers")
        if self.parameter is SweepParameter.BETA and any(v <= 0 for v in self.values):  # type: ignore[operator]
            raise ValueError("beta must be positive")
        return self

    def seed_list(self) -> list[int]:
        return list(range(self.seed_offset, self.seed_offset + self.seeds))

    def points(self) -> list[SweepPoint]:
        """Resolve every swept value into a SweepPoint, in the order given."""
        base = dict(beta=self.beta, steps=self.steps, ec_period=self.ec_period, theta_a=self.theta_a, theta_b=self.theta_b)
        points = []
        for value in self.values:
            if self.parameter is SweepParameter.THETA:
                theta_a, theta_b = value  # type: ignore[misc]
                point = {**base, "theta_a": theta_a, "theta_b": theta_b}
            elif self.parameter is SweepParameter.STEPS:
                point = {**base, "steps": int(value)}  # type: ignore[arg-type]
            elif self.parameter is SweepParameter.SQUEEZING_DB:
                point = {**base, "beta": beta_from_db(float(value))}  # type: ignore[arg-type]
            else:
                point = {**base, "beta": float(value)}  # type: ignore[arg-type]
            points.append(SweepPoint.model_validate(point))
        return points


def run_point(spec: SweepSpec, point: SweepPoint) -> SweepRow:
    """Run every seed of the spec at one point."""
    logger.debug("sweep point beta=%.4f steps=%d theta=(%.3f, %.3f)", point.beta, point.steps, point.theta_a, point.theta_b)
    return run_sweep_point(
        point.beta,
        point.steps,
        point.ec_period,
        spec.seed_list(),
        spec.input_qubit,
        spec.variant,
        spec.mode,
        spec.cutoff,
        point.theta_a,
        point.theta_b,
    )


def run_sweep_spec(spec: SweepSpec) -> list[SweepRow]:
    """Sequential runner; the async SweepsResource spreads points over the work pool."""
    return [run_point(spec, point) for point in spec.points()]
