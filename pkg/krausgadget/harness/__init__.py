"""krausgadget - Harness"""

from .identities import IdentityCase, IdentityReport, registry_ids, run_all, run_identity
from .sweeps import SweepParameter, SweepPoint, SweepSpec, run_sweep_spec

__all__ = [
    "IdentityCase",
    "IdentityReport",
    "registry_ids",
    "run_identity",
    "run_all",
    "SweepParameter",
    "SweepPoint",
    "SweepSpec",
    "run_sweep_spec",
]
