"""
krausgadget

Truncated-Fock simulator for continuous-variable gate teleportation: Kraus
operators of the two-macronode gadget, Kraus-state gate extraction and GKP
error correction with qunaught ancillas.

Quick Start:
    ```python
    from krausgadget import AncillaSpec, GadgetConfig, HomodyneOutcome, kraus_analytic, kraus_direct

    config = GadgetConfig(
        theta_a=1.2,
        theta_b=0.3,
        ancilla_psi=AncillaSpec.qunaught(beta=0.05),
        ancilla_phi=AncillaSpec.qunaught(beta=0.05),
        cutoff=100,
    )
    outcome = HomodyneOutcome(m_a=0.5, m_b=-0.2)
    direct = kraus_direct(config, outcome)
    analytic = kraus_analytic(config, outcome).operator
    ```

Async facade:
    ```python
    from krausgadget import KrausSimulator

    async with KrausSimulator(workers=4) as sim:
        reports = await sim.identities.run_all(cutoff=60)
    ```
"""

from .client import KrausSimulator
from .config import Settings, get_settings, load_settings
from .exceptions import (
    CodespaceWeightError,
    CutoffConvergenceError,
    DegenerateAngleError,
    DimensionMismatchError,
    GridMassError,
    JobFailedError,
    KrausGadgetError,
    ReportSchemaError,
    UnknownIdentityError,
    VanishingDensityError,
    ZeroNormError,
)
from .fock_core import FockOperator, FockState, NormKind
from .gkp_ec import ChainMode, ChainReport, EcCase, EcVariant, PlainTeleport, SweepRow, run_chain
from .harness.identities import IdentityReport, run_identity
from .harness.sweeps import SweepSpec
from .states import AncillaSpec
from .teleport_gadget import GadgetConfig, HomodyneOutcome, kraus_analytic, kraus_direct, kraus_state

__version__ = "0.1.0"
__all__ = [
    "KrausSimulator",
    "Settings",
    "get_settings",
    "load_settings",
    "FockState",
    "FockOperator",
    "NormKind",
    "AncillaSpec",
    "GadgetConfig",
    "HomodyneOutcome",
    "kraus_state",
    "kraus_direct",
    "kraus_analytic",
    "EcCase",
    "EcVariant",
    "PlainTeleport",
    "ChainMode",
    "ChainReport",
    "SweepRow",
    "run_chain",
    "SweepSpec",
    "IdentityReport",
    "run_identity",
    "KrausGadgetError",
    "CutoffConvergenceError",
    "DimensionMismatchError",
    "DegenerateAngleError",
    "ZeroNormError",
    "CodespaceWeightError",
    "GridMassError",
    "VanishingDensityError",
    "UnknownIdentityError",
    "ReportSchemaError",
    "JobFailedError",
]
