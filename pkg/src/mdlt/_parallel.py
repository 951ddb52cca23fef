"""Chunked, optionally threaded evaluation of vectorised callables.

Worker count is capped by the ``MDLT_THREADS`` environment variable
(default 1, i.e. serial).  numpy releases the GIL inside most kernels, so
threads give real speedups for large node sets.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 65536


def max_workers():
    raw = os.environ.get("MDLT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def map_chunks(func, points, chunk=CHUNK):
    """Evaluate ``func`` on row-chunks of ``points`` and stack the results.

    ``func`` maps an ``(k, ...)`` array to an ``(k, ...)`` array.
    """
    n = points.shape[0]
    if n <= chunk:
        return func(points)
    bounds = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    workers = min(max_workers(), len(bounds))
    if workers == 1:
        parts = [func(points[a:b]) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: func(points[ab[0]:ab[1]]), bounds))
    return np.concatenate(parts, axis=0)
