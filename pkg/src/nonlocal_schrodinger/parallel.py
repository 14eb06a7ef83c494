"""Order-preserving parallel map over independent quadrature nodes."""

import os
from concurrent.futures import ThreadPoolExecutor

WORKERS_ENV = "NONLOCAL_SCHRODINGER_WORKERS"


def default_workers():
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    value = int(raw)
    if value < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return value


def parallel_map(fn, items, workers=None):
    """Apply ``fn`` to each item; results come back in input order.

    Items are evaluated independently, so the result does not depend on
    the number of workers.
    """
    items = list(items)
    workers = default_workers() if workers is None else int(workers)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
