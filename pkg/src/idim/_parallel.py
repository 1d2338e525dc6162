"""Seeded chunking and order-preserving parallel map.

Work is split into chunks whose sizes and seeds depend only on the budget and
the master seed, never on the worker count, so results are reproducible for
any ``IDIM_THREADS``.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ._backend import threads


def seed_sequence(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def chunked(total, chunk_size, seed):
    """Split ``total`` draws into ``(size, SeedSequence)`` chunks."""
    chunk_size = max(1, int(chunk_size))
    n_chunks = max(1, -(-int(total) // chunk_size))
    children = seed_sequence(seed).spawn(n_chunks)
    sizes = [chunk_size] * (n_chunks - 1) + [int(total) - chunk_size * (n_chunks - 1)]
    return list(zip(sizes, children))


def ordered_map(fn, items):
    items = list(items)
    workers = min(threads(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
