"""
Parallel dispatch of independent sweep points.

Each (N, lambda) point runs in its own worker process with its own solver;
results come back in submission order whatever the completion order.
"""

import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Callable, List, Optional, Sequence

from absl import logging
from tqdm import tqdm

THREADS_ENV = "SUPERRAD_THREADS"


def resolve_threads(flag: Optional[int] = None) -> int:
    """--threads beats SUPERRAD_THREADS beats the hardware thread count."""
    if flag is not None and flag > 0:
        return int(flag)
    env = os.environ.get(THREADS_ENV, "").strip()
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
        if value > 0:
            return value
    return os.cpu_count() or 1


def _init_worker():
    # one numba thread per worker process
    import numba
    numba.set_num_threads(1)


def run_jobs(fn: Callable, jobs: Sequence, threads: int = 1, desc: str = "sweep",
             quiet: bool = False) -> List:
    """Apply fn to every job and return the results in job order.

    fn and the jobs must be picklable when threads > 1.
    """
    jobs = list(jobs)
    results: List = [None] * len(jobs)
    workers = max(1, min(threads, len(jobs)))
    logging.info("%s: %d points on %d worker(s)", desc, len(jobs), workers)
    if workers == 1:
        for index, job in enumerate(tqdm(jobs, desc=desc, disable=quiet)):
            results[index] = fn(job)
        return results

    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker) as executor:
        future_to_index = {executor.submit(fn, job): index for index, job in enumerate(jobs)}
        for future in tqdm(as_completed(future_to_index), total=len(jobs), desc=desc, disable=quiet):
            index = future_to_index[future]
            try:
                results[index] = future.result()
            except Exception:
                logging.error("%s: point %d (%r) failed", desc, index, jobs[index])
                for pending in future_to_index:
                    pending.cancel()
                raise
    return results
