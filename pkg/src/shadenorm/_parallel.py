import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

# Fixed chunk size so the work split never depends on the thread count.
CHUNK = 16384


def thread_count():
    raw = os.environ.get("SHADENORM_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def map_rows(func, *arrays, out_dtypes):
    """Apply ``func`` to fixed-size row chunks of ``arrays``.

    ``func`` gets chunk slices and returns a tuple of arrays, one per entry
    in ``out_dtypes``. Output is independent of SHADENORM_THREADS because
    each chunk is computed by the same code on the same rows.
    """
    n = arrays[0].shape[0]
    bounds = [(s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]

    def work(b):
        s, e = b
        return func(*(a[s:e] for a in arrays))

    workers = thread_count()
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]

    if not parts:
        return tuple(np.empty((0,), dtype=d) for d in out_dtypes)
    return tuple(np.concatenate([p[k] for p in parts], axis=0)
                 for k in range(len(out_dtypes)))
