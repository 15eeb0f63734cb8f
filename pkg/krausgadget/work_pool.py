"""
krausgadget - Work Pool

Async wrapper around a thread pool: numerical jobs run off the event loop,
results come back in submission order, and unexpected failures are mapped to
domain exceptions.
"""

import asyncio
import logging
import uuid
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, Optional, TypeVar

from pydantic import ValidationError

from .config import Settings, get_settings
from .exceptions import JobFailedError, KrausGadgetError

logger = logging.getLogger(__name__)

T = TypeVar("T")


class WorkPool:
    """
    Async work pool for simulator jobs.

    Handles:
    - Running blocking numpy/scipy work on worker threads
    - Correlation ids for log tracing
    - Mapping foreign exceptions to JobFailedError
    """

    def __init__(self, workers: Optional[int] = None, settings: Optional[Settings] = None):
        """
        Initialize the pool.

        Args:
            workers: Thread count (default: settings.workers, then the executor default)
            settings: Settings (default: process-wide)
        """
        self.settings = settings or get_settings()
        self.workers = workers or self.settings.workers
        self._executor: Optional[ThreadPoolExecutor] = None

    async def __aenter__(self) -> "WorkPool":
        self._get_executor()
        return self

    async def __aexit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        await self.close()

    def _get_executor(self) -> ThreadPoolExecutor:
        if self._executor is None:
            self._executor = ThreadPoolExecutor(max_workers=self.workers, thread_name_prefix="krausgadget")
        return self._executor

    async def run(self, fn: Callable[..., T], *args: Any, **kwargs: Any) -> T:
        """
        Run one job on the pool.

        Raises:
            KrausGadgetError: Re-raised unchanged
            pydantic.ValidationError: Re-raised unchanged
            JobFailedError: For any other exception
        """
        job_id = uuid.uuid4().hex[:12]
        loop = asyncio.get_running_loop()
        logger.debug("job %s: %s", job_id, getattr(fn, "__name__", repr(fn)))
        try:
            return await loop.run_in_executor(self._get_executor(), lambda: fn(*args, **kwargs))
        except (KrausGadgetError, ValidationError):
            raise
        except Exception as e:
            logger.warning("job %s failed: %s", job_id, e)
            raise JobFailedError(job_id, e) from e

    async def map(self, fn: Callable[[Any], T], items: Iterable[Any]) -> list[T]:
        """Run fn over items concurrently; results keep the order of items."""
        return list(await asyncio.gather(*(self.run(fn, item) for item in items)))

    async def close(self) -> None:
        """Shut down the executor, waiting for running jobs."""
        if self._executor is not None:
            executor, self._executor = self._executor, None
            await asyncio.get_running_loop().run_in_executor(None, executor.shutdown)
