import concurrent.futures
import logging
from typing import Any, Callable, Dict, List, Sequence, TypeVar

from tqdm import tqdm

from nqklab.logging_setup import progress_disabled

logger = logging.getLogger(__name__)

T = TypeVar('T')


def run_jobs(fn: Callable[..., T], jobs: Sequence[Any], max_workers: int = 1, desc: str = "jobs") -> List[T]:
    """
    Run fn(job) for every job on a bounded thread pool.

    Results come back in job order whatever order they complete in, so the
    worker count never changes the output. The first failing job is logged
    and re-raised once the pool has shut down.

    Args:
        fn: Called with one job at a time
        jobs: Job arguments, one per call
        max_workers: Pool size; 1 runs the jobs inline
        desc: Progress bar label

    Returns:
        List of fn results indexed like jobs
    """
    disable = progress_disabled(logger)
    if max_workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in tqdm(jobs, desc=desc, leave=False, disable=disable)]

    results: Dict[int, T] = {}
    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as executor:
        future_to_index = {executor.submit(fn, job): i for i, job in enumerate(jobs)}
        with tqdm(total=len(jobs), desc=desc, leave=False, disable=disable) as bar:
            for future in concurrent.futures.as_completed(future_to_index):
                index = future_to_index[future]
                try:
                    results[index] = future.result()
                except Exception as e:
                    logger.error("❌ %s %d failed: %s", desc, index, e)
                    for pending in future_to_index:
                        pending.cancel()
                    raise
                bar.update(1)
    return [results[i] for i in range(len(jobs))]
