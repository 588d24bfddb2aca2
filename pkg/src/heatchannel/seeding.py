"""Deterministic seed derivation and chunked trial execution.

Per-chunk seeds are derived from ``(master, tag, index)`` with numpy's
``SeedSequence`` hash, so results depend only on the master seed and the
chunk layout, never on scheduling or worker count.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

__all__ = ["derive_seed", "rng_for", "run_chunked", "DEFAULT_CHUNK"]

DEFAULT_CHUNK = 4096
_MASK64 = (1 << 64) - 1


def derive_seed(master: int, tag: str, index: int) -> int:
    """64-bit seed for stream ``index`` of experiment ``tag``.

    The mixing function is ``SeedSequence([master mod 2**64, crc32(tag), index])``
    followed by ``generate_state(1, uint64)``.
    """
    ss = np.random.SeedSequence([int(master) & _MASK64, zlib.crc32(tag.encode("utf-8")), int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


def rng_for(master: int, tag: str, index: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, tag, index))


def run_chunked(
    fn: Callable[[np.random.Generator, int], np.ndarray],
    trials: int,
    seed: int,
    tag: str,
    chunk: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> np.ndarray:
    """Evaluate ``fn(rng, count)`` over consecutive chunks and concatenate.

    Chunk ``i`` covers trials ``[i*chunk, min((i+1)*chunk, trials))`` and gets
    its own generator ``rng_for(seed, tag, i)``.  The output is ordered by trial
    index whatever ``workers`` is.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    counts = [min(chunk, trials - start) for start in range(0, trials, chunk)]

    def job(i):
        return np.asarray(fn(rng_for(seed, tag, i), counts[i]))

    if workers <= 1 or len(counts) == 1:
        parts = [job(i) for i in range(len(counts))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(counts))))
    return np.concatenate(parts, axis=0)
