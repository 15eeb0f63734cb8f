"""
krausgadget - Configuration

Numerical knobs shared by every module. Values come from, in increasing
precedence: defaults, ``KRAUSGADGET_*`` environment variables, a flat JSON
file mirroring the CLI flags, and explicit overrides.
"""

import json
import os
from functools import lru_cache
from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

ENV_PREFIX = "KRAUSGADGET_"


class Settings(BaseModel):
    """
    Simulator settings.

    Attributes:
        interior_fraction: Fraction of the cutoff treated as the trusted interior
        convergence_schedule: Cutoffs tried by converge_in_cutoff
        convergence_tol: Change below which a quantity counts as converged
        truncation_tolerance: Largest norm deficit a damped constructor may lose
        oversampling: Padding factor for gates built from truncated generators
        beta_schedule: Damping values used for regularized identity checks
        beta_meas: Damping of regularized homodyne bras
        outcome_grid: (low, high, step) of the homodyne outcome grid
        grid_mass_threshold: Minimum outcome mass the grid has to capture
        comb_epsilon: Gaussian-tail cut for GKP comb sums
        trend_slack_fraction: Allowed residual increase along the beta schedule, as a fraction of tolerance
        workers: Thread count of the work pool (None = executor default)
    """

    model_config = ConfigDict(frozen=True)

    interior_fraction: float = Field(default=2.0 / 3.0, gt=0.0, le=1.0)
    convergence_schedule: tuple[int, ...] = (20, 40, 60, 80, 100)
    convergence_tol: float = Field(default=1e-6, gt=0.0)
    truncation_tolerance: float = Field(default=1e-3, gt=0.0, lt=1.0)
    oversampling: float = Field(default=3.0, ge=1.0)
    beta_schedule: tuple[float, ...] = (0.1, 0.05, 0.02)
    beta_meas: float = Field(default=0.02, gt=0.0)
    outcome_grid: tuple[float, float, float] = (-6.0, 6.0, 0.05)
    grid_mass_threshold: float = Field(default=0.999, gt=0.0, le=1.0)
    comb_epsilon: float = Field(default=1e-14, gt=0.0)
    trend_slack_fraction: float = Field(default=0.1, ge=0.0)
    workers: Optional[int] = Field(default=None, ge=1)

    @field_validator("convergence_schedule")
    @classmethod
    def _strictly_increasing(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if len(value) < 2 or any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("convergence_schedule must hold at least two strictly increasing cutoffs")
        return value

    @field_validator("outcome_grid")
    @classmethod
    def _grid_ordered(cls, value: tuple[float, float, float]) -> tuple[float, float, float]:
        low, high, step = value
        if not (high > low and step > 0):
            raise ValueError("outcome_grid must be (low, high, step) with high > low and step > 0")
        return value

    def interior(self, cutoff: int) -> int:
        """Interior dimension for a given cutoff (at least 1)."""
        return max(1, int(self.interior_fraction * cutoff))


def _from_env() -> dict[str, Any]:
    values: dict[str, Any] = {}
    for name in Settings.model_fields:
        raw = os.environ.get(ENV_PREFIX + name.upper())
        if raw is None:
            continue
        # Tuples are given as JSON arrays, scalars as plain text
        try:
            values[name] = json.loads(raw)
        except json.JSONDecodeError:
            values[name] = raw
    return values


def load_settings(path: Optional[str | Path] = None, **overrides: Any) -> Settings:
    """
    Build settings from environment, an optional JSON file and overrides.

    Args:
        path: Flat JSON document whose keys are Settings field names
        **overrides: Explicit values (CLI flags); None values are ignored

    Returns:
        Validated Settings

    Raises:
        pydantic.ValidationError: If a value is out of range

    Example:
        ```python
        settings = load_settings("run.json", interior_fraction=0.5)
        ```
    """
    values = _from_env()
    if path is not None:
        with open(path, encoding="utf-8") as f:
            document = json.load(f)
        values.update({k: v for k, v in document.items() if k in Settings.model_fields})
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Settings.model_validate(values)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Process-wide default settings (environment applied once)."""
    return load_settings()
