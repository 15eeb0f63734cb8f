"""
krausgadget - Report Validator

Canonical-JSON report envelopes with a SHA-256 digest, and CSV files whose
first line names a versioned schema followed by a fixed header.
"""

import csv
import hashlib
import hmac
import json
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import numpy as np
from pydantic import BaseModel

from ..exceptions import ReportSchemaError
from ..gkp_ec import SweepRow

PathLike = Union[str, Path]

SWEEP_SCHEMA = "krausgadget.sweep/v1"
SWEEP_COLUMNS = (
    "squeezing_db",
    "beta",
    "steps",
    "ec_period",
    "mean_fidelity",
    "stderr",
    "n_seeds",
    "theta_a",
    "theta_b",
)
WAVEFUNCTION_SCHEMA = "krausgadget.wavefunction/v1"
WAVEFUNCTION_COLUMNS = ("x", "re", "im", "abs2")
IDENTITY_SCHEMA = "krausgadget.identities/v1"
CHAIN_SCHEMA = "krausgadget.chain/v1"


def _plain(payload: Any) -> Any:
    if isinstance(payload, BaseModel):
        return payload.model_dump(mode="json", by_alias=True)
    if isinstance(payload, (list, tuple)):
        return [_plain(item) for item in payload]
    return payload


def canonical_json(payload: Any) -> bytes:
    """Sorted keys, no whitespace; pydantic models are dumped by alias first."""
    return json.dumps(_plain(payload), sort_keys=True, separators=(",", ":")).encode("utf-8")


class ReportValidator:
    """
    Writes and verifies report envelopes.

    An envelope is {"schema": ..., "digest": "sha256=<hex>", "data": ...} where
    the digest covers the canonical JSON of data.
    """

    def __init__(self, schema: str):
        self.schema = schema

    @staticmethod
    def digest(payload: Any) -> str:
        return f"sha256={hashlib.sha256(canonical_json(payload)).hexdigest()}"

    def envelope(self, payload: Any) -> dict[str, Any]:
        data = _plain(payload)
        return {"schema": self.schema, "digest": self.digest(data), "data": data}

    def verify(self, document: dict[str, Any]) -> bool:
        """True if the schema matches and the digest covers the data."""
        if document.get("schema") != self.schema or "data" not in document:
            return False
        return hmac.compare_digest(str(document.get("digest", "")), self.digest(document["data"]))

    def dumps(self, payload: Any) -> str:
        return json.dumps(self.envelope(payload), sort_keys=True, indent=2)

    def write(self, path: PathLike, payload: Any) -> Path:
        target = Path(path)
        target.write_text(self.dumps(payload) + "\n", encoding="utf-8")
        return target

    def parse(self, raw: Union[str, bytes]) -> Any:
        """
        Parse and verify an envelope in one step.

        Raises:
            ReportSchemaError: If the document is not JSON, has another schema or a bad digest

        Example:
            ```python
            data = ReportValidator(IDENTITY_SCHEMA).parse(Path("report.json").read_text())
            ```
        """
        try:
            document = json.loads(raw)
        except json.JSONDecodeError as e:
            raise ReportSchemaError(f"report is not valid JSON: {e}") from e
        if not isinstance(document, dict) or not self.verify(document):
            raise ReportSchemaError(f"report failed {self.schema} schema or digest check")
        return document["data"]

    def read(self, path: PathLike) -> Any:
        return self.parse(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(path: PathLike, schema: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write `# schema` then the header then one line per row."""
    target = Path(path)
    with open(target, "w", encoding="utf-8", newline="") as f:
        f.write(f"# {schema}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ReportSchemaError(f"row has {len(row)} cells, {schema} expects {len(columns)}")
            writer.writerow([_cell(v) for v in row])
    return target


def read_csv(path: PathLike, schema: str, columns: Sequence[str]) -> list[dict[str, float]]:
    """
    Read a CSV written by write_csv, checking schema line and header.

    Raises:
        ReportSchemaError: On a missing or different schema line, header or row width
    """
    with open(path, encoding="utf-8", newline="") as f:
        first = f.readline().strip()
        if first != f"# {schema}":
            raise ReportSchemaError(f"expected schema line '# {schema}', found {first!r}")
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != tuple(columns):
            raise ReportSchemaError(f"{schema} header mismatch: {header}")
        rows = []
        for line_no, cells in enumerate(reader, start=3):
            if len(cells) != len(columns):
                raise ReportSchemaError(f"line {line_no}: {len(cells)} cells, expected {len(columns)}")
            rows.append({name: float(cell) for name, cell in zip(columns, cells)})
    return rows


def write_sweep_csv(path: PathLike, rows: Sequence[SweepRow]) -> Path:
    ordered = sorted(rows, key=lambda r: tuple(getattr(r, c) for c in SWEEP_COLUMNS))
    return write_csv(path, SWEEP_SCHEMA, SWEEP_COLUMNS, ([getattr(r, c) for c in SWEEP_COLUMNS] for r in ordered))


def read_sweep_csv(path: PathLike) -> list[SweepRow]:
    return [SweepRow.model_validate(row) for row in read_csv(path, SWEEP_SCHEMA, SWEEP_COLUMNS)]


def write_wavefunction_csv(path: PathLike, grid: Sequence[float], values: Sequence[complex]) -> Path:
    xs = np.asarray(grid, dtype=np.float64)
    psi = np.asarray(values, dtype=np.complex128)
    if xs.shape != psi.shape:
        raise ReportSchemaError(f"grid has {xs.size} points but {psi.size} values")
    rows = zip(xs, psi.real, psi.imag, np.abs(psi) ** 2)
    return write_csv(path, WAVEFUNCTION_SCHEMA, WAVEFUNCTION_COLUMNS, rows)
