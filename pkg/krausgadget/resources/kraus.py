"""krausgadget - Kraus Resource"""

from typing import Optional, Sequence

from ..fock_core import FockOperator
from ..teleport_gadget import (
    GadgetConfig,
    HomodyneOutcome,
    KrausResult,
    PipelineComparison,
    compare_pipelines,
    kraus_analytic,
    kraus_direct,
)
from ..work_pool import WorkPool


class KrausResource:
    """
    Kraus operators of the teleportation gadget.

    Handles:
    - Direct contraction and analytic assembly
    - Dual-pipeline comparisons over outcome sets
    """

    def __init__(self, pool: WorkPool):
        self.pool = pool

    async def direct(self, config: GadgetConfig, outcome: HomodyneOutcome) -> FockOperator:
        return await self.pool.run(kraus_direct, config, outcome)

    async def analytic(self, config: GadgetConfig, outcome: HomodyneOutcome) -> KrausResult:
        return await self.pool.run(kraus_analytic, config, outcome)

    async def compare(
        self,
        config: GadgetConfig,
        outcomes: Sequence[HomodyneOutcome],
        angles: Optional[Sequence[tuple[float, float]]] = None,
    ) -> list[PipelineComparison]:
        """
        Compare both pipelines at every outcome (and every angle pair, if given).

        Args:
            config: Gadget configuration; its angles are replaced when `angles` is given
            outcomes: Homodyne outcomes
            angles: Optional (theta_a, theta_b) pairs

        Returns:
            One comparison per (angle pair, outcome), in input order

        Example:
            ```python
            grid = [HomodyneOutcome(m_a=a, m_b=b) for a in (-0.5, 0, 0.5) for b in (-0.5, 0, 0.5)]
            worst = max(c.distance for c in await sim.kraus.compare(config, grid))
            ```
        """
        configs = [config] if angles is None else [
            GadgetConfig(**{**dict(config), "theta_a": a, "theta_b": b}) for a, b in angles
        ]
        jobs = [(c, o) for c in configs for o in outcomes]
        return await self.pool.map(lambda job: compare_pipelines(*job), jobs)
