"""
Branch evaluation with a smallest-successful-branch reducer.

Branches are evaluated in enumeration order. With several workers the
stream is cut into windows; every window is evaluated in parallel and its
results are read back in order, so the reported solution and the branch
counters are the same as for a sequential run.
"""
from concurrent.futures import ProcessPoolExecutor
from itertools import islice
from typing import Callable, Iterable, Optional, TypeVar
import logging

from ..models.result import BranchStats

logger = logging.getLogger(__name__)

try:
    from itertools import batched
except ImportError:  # Python < 3.12
    def batched(iterable, n):
        it = iter(iterable)
        while batch := tuple(islice(it, n)):
            yield batch

B = TypeVar("B")
R = TypeVar("R")


def first_success(
    branches: Iterable[B],
    evaluate: Callable[[B], Optional[R]],
    stats: BranchStats,
    jobs: int = 1,
    chunk_size: int = 64,
) -> Optional[R]:
    """
    Evaluate branches until one succeeds.

    Args:
        branches: Branches in enumeration order
        evaluate: Picklable callable returning a result or None
        stats: Counters updated for every branch up to the winner
        jobs: Worker processes (1 evaluates in-process)
        chunk_size: Branches per worker task

    Returns:
        Result of the first successful branch in enumeration order, or None
    """
    if jobs <= 1:
        for branch in branches:
            result = evaluate(branch)
            stats.record(result is not None)
            if result is not None:
                return result
        return None

    logger.debug(f"Evaluating branches with {jobs} workers")
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for window in batched(branches, jobs * chunk_size):
            for result in pool.map(evaluate, window, chunksize=chunk_size):
                stats.record(result is not None)
                if result is not None:
                    pool.shutdown(wait=False, cancel_futures=True)
                    return result
    return None
