"""Work-pool helper; DWORKLAB_THREADS caps the pool size (default 1).

Results are returned in input order regardless of pool size, so reports are
bit-identical between serial and pooled runs.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count():
    try:
        k = int(os.environ.get("DWORKLAB_THREADS", "1"))
    except ValueError:
        return 1
    return max(1, k)


def pool_map(fn, items):
    items = list(items)
    k = worker_count()
    if k <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))
