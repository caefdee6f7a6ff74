"""Seeded random streams and shot-chunked parallel Monte Carlo.

Worker i of a run with master seed s draws from
``PCG64(SeedSequence(s, spawn_key=(i,)))``. Shots are split as evenly as
possible, the first ``shots % workers`` workers taking one extra, and the
per-worker count arrays are summed. The merged table therefore depends only
on (seed, workers, shots), never on thread scheduling.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional

import numpy as np

from bloch.errors import BlochError

logger = logging.getLogger(__name__)

SEED_ENV = "BLOCH_SEED"
SEED_MASK = (1 << 64) - 1

CountTask = Callable[[np.random.Generator, int], np.ndarray]


def default_seed(seed: Optional[int] = None, warn: bool = True) -> int:
    """Explicit seed, else $BLOCH_SEED, else 0 (logged unless warn is False)."""
    if seed is not None:
        return check_seed(seed)
    env = os.getenv(SEED_ENV)
    if env:
        try:
            value = int(env, 0)
        except ValueError:
            raise BlochError(f"{SEED_ENV} must be an integer, got {env!r}") from None
        return check_seed(value)
    if warn:
        logger.warning("no seed given and %s unset; using seed 0", SEED_ENV)
    return 0


def check_seed(seed: int) -> int:
    seed = int(seed)
    if seed < 0 or seed > SEED_MASK:
        raise BlochError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def worker_rng(seed: int, worker_index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=(int(worker_index),))
    return np.random.Generator(np.random.PCG64(ss))


def child_seed(seed: int, *key: int) -> int:
    """Independent 64-bit seed for a named sub-experiment of a seeded run."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def split_shots(shots: int, workers: int) -> List[int]:
    if shots < 1:
        raise BlochError(f"shots must be at least 1, got {shots}")
    if workers < 1:
        raise BlochError(f"workers must be at least 1, got {workers}")
    base, extra = divmod(int(shots), int(workers))
    return [base + (1 if i < extra else 0) for i in range(workers)]


def parallel_counts(task: CountTask, shots: int, seed: int, workers: int = 1) -> np.ndarray:
    """Run ``task(rng, n)`` once per worker and sum the returned count arrays."""
    allocation = split_shots(shots, workers)
    logger.debug("seed=%d workers=%d allocation=%s", seed, workers, allocation)
    jobs = [(worker_rng(seed, i), n) for i, n in enumerate(allocation) if n > 0]
    if len(jobs) == 1:
        return np.asarray(task(*jobs[0]))
    with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
        parts = list(pool.map(lambda job: np.asarray(task(*job)), jobs))
    return np.sum(parts, axis=0)
