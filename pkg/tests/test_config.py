import json

import pytest
from pydantic import ValidationError

from krausgadget.config import Settings, get_settings, load_settings


def test_defaults():
    settings = Settings()
    assert settings.interior_fraction == pytest.approx(2.0 / 3.0)
    assert settings.beta_schedule == (0.1, 0.05, 0.02)
    assert settings.outcome_grid == (-6.0, 6.0, 0.05)
    assert settings.interior(60) == 40
    assert Settings(interior_fraction=0.01).interior(10) == 1


def test_environment_overrides_defaults(monkeypatch):
    monkeypatch.setenv("KRAUSGADGET_INTERIOR_FRACTION", "0.5")
    monkeypatch.setenv("KRAUSGADGET_BETA_SCHEDULE", "[0.2, 0.1]")
    settings = load_settings()
    assert settings.interior_fraction == 0.5
    assert settings.beta_schedule == (0.2, 0.1)


def test_file_then_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("KRAUSGADGET_BETA_MEAS", "0.05")
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"beta_meas": 0.03, "oversampling": 4, "cutoff": 80}))
    settings = load_settings(path, oversampling=5, workers=None)
    assert settings.beta_meas == 0.03
    assert settings.oversampling == 5
    assert settings.workers is None


@pytest.mark.parametrize(
    "field, value",
    [
        ("convergence_schedule", (40, 20)),
        ("convergence_schedule", (20,)),
        ("outcome_grid", (1.0, -1.0, 0.1)),
        ("outcome_grid", (-1.0, 1.0, 0.0)),
        ("interior_fraction", 0.0),
        ("workers", 0),
    ],
)
def test_invalid_settings(field, value):
    with pytest.raises(ValidationError):
        load_settings(**{field: value})


def test_settings_are_frozen():
    with pytest.raises(ValidationError):
        get_settings().beta_meas = 0.1  # type: ignore[misc]


def test_process_settings_are_cached(monkeypatch):
    first = get_settings()
    monkeypatch.setenv("KRAUSGADGET_BETA_MEAS", "0.07")
    assert get_settings() is first
    get_settings.cache_clear()
    assert get_settings().beta_meas == 0.07
