"""krausgadget - Reports"""

from .validator import (
    CHAIN_SCHEMA,
    IDENTITY_SCHEMA,
    SWEEP_COLUMNS,
    SWEEP_SCHEMA,
    WAVEFUNCTION_COLUMNS,
    WAVEFUNCTION_SCHEMA,
    ReportValidator,
    canonical_json,
    read_csv,
    read_sweep_csv,
    write_csv,
    write_sweep_csv,
    write_wavefunction_csv,
)

__all__ = [
    "ReportValidator",
    "canonical_json",
    "read_csv",
    "write_csv",
    "read_sweep_csv",
    "write_sweep_csv",
    "write_wavefunction_csv",
    "IDENTITY_SCHEMA",
    "CHAIN_SCHEMA",
    "SWEEP_SCHEMA",
    "SWEEP_COLUMNS",
    "WAVEFUNCTION_SCHEMA",
    "WAVEFUNCTION_COLUMNS",
]
