"""Shared fixtures."""

import numpy as np
import pytest

from krausgadget.config import ENV_PREFIX, Settings, get_settings
from krausgadget.fock_core import FockState, NormKind
from krausgadget.teleport_gadget import HomodyneOutcome


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch: pytest.MonkeyPatch):
    """Every test sees default settings, whatever the environment holds."""
    for name in Settings.model_fields:
        monkeypatch.delenv(ENV_PREFIX + name.upper(), raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def outcome() -> HomodyneOutcome:
    return HomodyneOutcome(m_a=0.5, m_b=-0.2)


@pytest.fixture
def random_state(rng: np.random.Generator):
    """Factory for normalized random states with support on the first `support` levels."""

    def make(dim: int, support: int = 6) -> FockState:
        amps = np.zeros(dim, dtype=np.complex128)
        amps[:support] = rng.normal(size=support) + 1j * rng.normal(size=support)
        return FockState(amps, (dim,), NormKind.DENSITY).normalized()

    return make
