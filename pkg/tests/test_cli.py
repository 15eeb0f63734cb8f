import json

import numpy as np
import pytest

from krausgadget.harness.cli import EXIT_ERROR, EXIT_OK, main, parse_grid
from krausgadget.reports import (
    CHAIN_SCHEMA,
    IDENTITY_SCHEMA,
    WAVEFUNCTION_COLUMNS,
    WAVEFUNCTION_SCHEMA,
    ReportValidator,
    read_csv,
)
from krausgadget.states import approximate_gkp_wavefunction


def _error(capsys) -> dict:
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_parse_grid_includes_both_ends():
    np.testing.assert_allclose(parse_grid("-1:1:0.5"), [-1.0, -0.5, 0.0, 0.5, 1.0])


def test_identities_to_stdout(capsys):
    assert main(["identities", "--id", "bounce_transpose", "--cutoff", "20"]) == EXIT_OK
    data = ReportValidator(IDENTITY_SCHEMA).parse(capsys.readouterr().out)
    assert [item["id"] for item in data] == ["bounce_transpose"]
    assert data[0]["pass"] is True


def test_identities_to_file(tmp_path, capsys):
    out = tmp_path / "report.json"
    argv = ["identities", "--id", "sfactor_relation", "--id", "bounce_transpose", "--cutoff", "12", "--out", str(out)]
    assert main(argv) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == {"out": str(out), "passed": 2, "total": 2}
    assert len(ReportValidator(IDENTITY_SCHEMA).read(out)) == 2


def test_unknown_identity_is_an_error(capsys):
    assert main(["identities", "--id", "no_such_identity"]) == EXIT_ERROR
    error = _error(capsys)
    assert error["error"] == "UnknownIdentityError"
    assert "no_such_identity" in error["message"]


@pytest.mark.parametrize(
    "argv",
    [
        ["identities"],
        ["identities", "--cutoff", "ten", "--all"],
        ["no-such-command"],
        ["wavefunction", "--state", "gkp0", "--grid=2:-2:0.5", "--out", "unused.csv"],
    ],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_ERROR
    assert _error(capsys)["error"] == "UsageError"


def test_degenerate_angles_are_reported(capsys):
    argv = [
        "kraus-compare",
        "--theta-a", "0.3",
        "--theta-b", "0.3",
        "--ancilla-psi", "p_eigenstate",
        "--ancilla-phi", "q_eigenstate",
        "--beta", "0.2",
        "--ma", "0",
        "--mb", "0",
    ]
    assert main(argv) == EXIT_ERROR
    assert _error(capsys)["error"] == "DegenerateAngleError"


def test_kraus_compare(capsys):
    argv = [
        "kraus-compare",
        "--ancilla-psi", "p_eigenstate",
        "--ancilla-phi", "q_eigenstate",
        "--beta", "0.2",
        "--cutoff", "24",
        "--ma", "0.5",
        "--mb", "-0.2",
    ]
    assert main(argv) == EXIT_OK
    comparison = json.loads(capsys.readouterr().out)
    assert comparison["cutoff"] == 24
    assert comparison["outcome"] == {"m_a": 0.5, "m_b": -0.2}
    assert comparison["distance"] < 1e-4


def test_analytic_codeword_wavefunction(tmp_path, capsys):
    out = tmp_path / "gkp0.csv"
    assert main(["wavefunction", "--state", "gkp0", "--beta", "0.1", "--grid", "-2:2:0.5", "--out", str(out)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["points"] == 9
    rows = read_csv(out, WAVEFUNCTION_SCHEMA, WAVEFUNCTION_COLUMNS)
    grid = np.array([r["x"] for r in rows])
    expected = np.abs(approximate_gkp_wavefunction(0, 0.1, grid)) ** 2
    np.testing.assert_allclose([r["abs2"] for r in rows], expected, rtol=1e-12)


def test_fock_wavefunction_of_the_vacuum(tmp_path):
    out = tmp_path / "vacuum.csv"
    argv = ["wavefunction", "--state", "squeezed_q:zeta=1", "--cutoff", "20", "--grid=-1:1:1", "--out", str(out)]
    assert main(argv) == EXIT_OK
    rows = read_csv(out, WAVEFUNCTION_SCHEMA, WAVEFUNCTION_COLUMNS)
    expected = np.exp(-np.array([1.0, 0.0, 1.0])) / np.sqrt(np.pi)
    np.testing.assert_allclose([r["abs2"] for r in rows], expected, atol=1e-10)


def test_config_file_supplies_flag_defaults(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"id": ["bounce_transpose"], "cutoff": 20, "interior_fraction": 0.5}))
    assert main(["identities", "--config", str(config)]) == EXIT_OK
    [report] = ReportValidator(IDENTITY_SCHEMA).parse(capsys.readouterr().out)
    assert report["cutoff"] == 20


def test_ec_chain_report(capsys):
    argv = ["ec-chain", "--steps", "1", "--ec-period", "0", "--beta", "0.2", "--cutoff", "30", "--seed", "3"]
    assert main(argv) == EXIT_OK
    report = ReportValidator(CHAIN_SCHEMA).parse(capsys.readouterr().out)
    assert report["schedule"] == ["teleport"]
    assert report["seed"] == 3
    assert 0.0 <= report["logical_fidelity"] <= 1.0
