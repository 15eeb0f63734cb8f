"""krausgadget - Sweeps Resource"""

import logging

from ..gkp_ec import SweepRow
from ..harness.sweeps import SweepSpec, run_point
from ..reports.validator import write_sweep_csv
from ..work_pool import WorkPool

logger = logging.getLogger(__name__)


class SweepsResource:
    """EC chain sweeps, one pool job per sweep point."""

    def __init__(self, pool: WorkPool):
        self.pool = pool

    async def run(self, spec: SweepSpec) -> list[SweepRow]:
        """
        Run every point of a sweep and write the CSV if the spec names an output.

        Args:
            spec: Sweep specification

        Returns:
            Rows in the order of spec.points()

        Example:
            ```python
            spec = SweepSpec(parameter="steps", values=[2, 4, 8], beta=0.05, seeds=20, out="sweep.csv")
            rows = await sim.sweeps.run(spec)
            ```
        """
        rows = await self.pool.map(lambda point: run_point(spec, point), spec.points())
        if spec.out is not None:
            write_sweep_csv(spec.out, rows)
            logger.info("wrote %d sweep rows to %s", len(rows), spec.out)
        return rows
