"""
krausgadget - Simulator Client

Async facade over the identity registry, the Kraus pipelines and EC sweeps.
"""

from typing import Any, Optional

from .config import Settings, get_settings
from .resources.identities import IdentitiesResource
from .resources.kraus import KrausResource
from .resources.sweeps import SweepsResource
from .work_pool import WorkPool


class KrausSimulator:
    """
    Gate-teleportation simulator client.

    Provides access to:
    - Identities: circuit-identity registry checks
    - Kraus: direct and analytic Kraus operators, dual-pipeline comparisons
    - Sweeps: EC chain fidelity sweeps

    Example:
        ```python
        from krausgadget import AncillaSpec, GadgetConfig, HomodyneOutcome, KrausSimulator, SweepSpec

        async def main():
            async with KrausSimulator(workers=4) as sim:
                reports = await sim.identities.run_all(cutoff=60)
                failed = [r.id for r in reports if not r.passed]

                config = GadgetConfig(
                    theta_a=1.2,
                    theta_b=0.3,
                    ancilla_psi=AncillaSpec.parse("qunaught@0.05"),
                    ancilla_phi=AncillaSpec.parse("qunaught@0.05"),
                    cutoff=100,
                )
                comparisons = await sim.kraus.compare(config, [HomodyneOutcome(m_a=0.5, m_b=-0.2)])

                rows = await sim.sweeps.run(
                    SweepSpec(parameter="squeezing_db", values=[8, 10, 12], steps=8, ec_period=2, seeds=50)
                )
        ```
    """

    def __init__(self, workers: Optional[int] = None, settings: Optional[Settings] = None):
        """
        Initialize the simulator.

        Args:
            workers: Thread count of the work pool (default from settings)
            settings: Numerical settings (default: process-wide)
        """
        self.settings = settings or get_settings()
        self._pool = WorkPool(workers=workers, settings=self.settings)

        self._identities: Optional[IdentitiesResource] = None
        self._kraus: Optional[KrausResource] = None
        self._sweeps: Optional[SweepsResource] = None

    @property
    def identities(self) -> IdentitiesResource:
        """Access the identities resource."""
        if self._identities is None:
            self._identities = IdentitiesResource(self._pool)
        return self._identities

    @property
    def kraus(self) -> KrausResource:
        """Access the Kraus resource."""
        if self._kraus is None:
            self._kraus = KrausResource(self._pool)
        return self._kraus

    @property
    def sweeps(self) -> SweepsResource:
        """Access the sweeps resource."""
        if self._sweeps is None:
            self._sweeps = SweepsResource(self._pool)
        return self._sweeps

    async def __aenter__(self) -> "KrausSimulator":
        await self._pool.__aenter__()
        return self

    async def __aexit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        await self._pool.__aexit__(exc_type, exc_val, exc_tb)

    async def close(self) -> None:
        """Shut down the work pool."""
        await self._pool.close()
