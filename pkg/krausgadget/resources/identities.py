"""krausgadget - Identities Resource"""

from typing import Optional, Sequence

from ..harness.identities import IdentityReport, registry_ids, run_identity
from ..work_pool import WorkPool


class IdentitiesResource:
    """
    Identity registry checks.

    Handles:
    - Running a single identity on the pool
    - Running the whole registry concurrently, reported in id order
    """

    def __init__(self, pool: WorkPool):
        self.pool = pool

    def registered(self) -> list[str]:
        """Registered identity ids."""
        return registry_ids()

    async def run(
        self,
        identity_id: str,
        cutoff: int = 60,
        beta_schedule: Optional[Sequence[float]] = None,
    ) -> IdentityReport:
        """
        Evaluate one identity.

        Args:
            identity_id: Registered id, e.g. "bs_displacement_choi"
            cutoff: Fock cutoff
            beta_schedule: Damping values, largest first (default from settings)

        Returns:
            IdentityReport

        Example:
            ```python
            report = await sim.identities.run("partial_p_comb", cutoff=40)
            print(report.residuals, report.passed)
            ```
        """
        return await self.pool.run(run_identity, identity_id, cutoff, beta_schedule, self.pool.settings)

    async def run_all(
        self,
        cutoff: int = 60,
        beta_schedule: Optional[Sequence[float]] = None,
        ids: Optional[Sequence[str]] = None,
    ) -> list[IdentityReport]:
        """Run several identities (default: all) concurrently; results are sorted by id."""
        selected = list(ids) if ids is not None else registry_ids()
        reports = await self.pool.map(
            lambda i: run_identity(i, cutoff, beta_schedule, self.pool.settings),
            selected,
        )
        return sorted(reports, key=lambda r: r.id)
