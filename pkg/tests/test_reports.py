import json

import numpy as np
import pytest

from krausgadget.exceptions import ReportSchemaError
from krausgadget.gkp_ec import SweepRow
from krausgadget.harness.identities import IdentityReport
from krausgadget.reports import (
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


def _reports() -> list[IdentityReport]:
    return [
        IdentityReport(id="bounce_transpose", cutoff=20, betas=[], residuals=[3e-15], passed=True),
        IdentityReport(id="case_ab", cutoff=60, betas=[0.1, 0.05], residuals=[2e-3, 1e-3], passed=True),
    ]


def _row(beta: float, steps: int) -> SweepRow:
    return SweepRow(
        squeezing_db=-10.0 * np.log10(beta),
        beta=beta,
        steps=steps,
        ec_period=2,
        mean_fidelity=0.9,
        stderr=0.01,
        n_seeds=50,
    )


def test_canonical_json_is_key_order_independent():
    assert canonical_json({"b": 1, "a": [1.5, 2]}) == b'{"a":[1.5,2],"b":1}'
    assert canonical_json({"a": 1, "b": 2}) == canonical_json({"b": 2, "a": 1})


def test_envelope_uses_aliases_and_verifies():
    validator = ReportValidator(IDENTITY_SCHEMA)
    document = validator.envelope(_reports())
    assert document["schema"] == IDENTITY_SCHEMA
    assert document["digest"].startswith("sha256=")
    assert document["data"][0]["pass"] is True
    assert validator.verify(document)


def test_tampered_report_is_rejected():
    validator = ReportValidator(IDENTITY_SCHEMA)
    document = json.loads(validator.dumps(_reports()))
    document["data"][1]["pass"] = False
    assert not validator.verify(document)
    with pytest.raises(ReportSchemaError):
        validator.parse(json.dumps(document))


def test_other_schema_is_rejected():
    raw = ReportValidator(IDENTITY_SCHEMA).dumps(_reports())
    assert not ReportValidator(SWEEP_SCHEMA).verify(json.loads(raw))
    with pytest.raises(ReportSchemaError):
        ReportValidator(IDENTITY_SCHEMA).parse("not json")


def test_report_file_round_trip(tmp_path):
    validator = ReportValidator(IDENTITY_SCHEMA)
    path = validator.write(tmp_path / "identities.json", _reports())
    data = validator.read(path)
    assert [IdentityReport.model_validate(item) for item in data] == _reports()


def test_sweep_csv_is_sorted_and_headed(tmp_path):
    path = write_sweep_csv(tmp_path / "sweep.csv", [_row(0.1, 8), _row(0.05, 4), _row(0.1, 2)])
    lines = path.read_text().splitlines()
    assert lines[0] == f"# {SWEEP_SCHEMA}"
    assert lines[1] == ",".join(SWEEP_COLUMNS)
    rows = read_sweep_csv(path)
    assert [(r.beta, r.steps) for r in rows] == [(0.1, 2), (0.1, 8), (0.05, 4)]
    assert rows[0] == _row(0.1, 2)


def test_csv_header_is_checked(tmp_path):
    path = write_csv(tmp_path / "other.csv", SWEEP_SCHEMA, ("a", "b"), [(1, 2.5)])
    with pytest.raises(ReportSchemaError):
        read_csv(path, SWEEP_SCHEMA, SWEEP_COLUMNS)
    with pytest.raises(ReportSchemaError):
        read_csv(path, WAVEFUNCTION_SCHEMA, ("a", "b"))
    assert read_csv(path, SWEEP_SCHEMA, ("a", "b")) == [{"a": 1.0, "b": 2.5}]


def test_row_width_is_checked(tmp_path):
    with pytest.raises(ReportSchemaError):
        write_csv(tmp_path / "bad.csv", SWEEP_SCHEMA, ("a", "b"), [(1,)])


def test_wavefunction_csv(tmp_path):
    grid = np.array([-1.0, 0.0, 1.0])
    values = np.array([0.5j, 1.0, -0.5])
    path = write_wavefunction_csv(tmp_path / "psi.csv", grid, values)
    rows = read_csv(path, WAVEFUNCTION_SCHEMA, WAVEFUNCTION_COLUMNS)
    assert [r["abs2"] for r in rows] == pytest.approx([0.25, 1.0, 0.25])
    assert rows[0]["im"] == pytest.approx(0.5)
    with pytest.raises(ReportSchemaError):
        write_wavefunction_csv(tmp_path / "bad.csv", grid, values[:2])
