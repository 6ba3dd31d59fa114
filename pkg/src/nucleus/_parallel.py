"""Thread-pool driver for nogil kernels.

Kernels take a worker id as their first argument and pull work in chunks
from a shared atomic cursor, so the pool only has to start them.
"""
import threading
from concurrent.futures import ThreadPoolExecutor

_pools = {}
_lock = threading.Lock()


def _pool(nthreads):
    with _lock:
        pool = _pools.get(nthreads)
        if pool is None:
            pool = ThreadPoolExecutor(max_workers=nthreads, thread_name_prefix="nucleus")
            _pools[nthreads] = pool
        return pool


def run_workers(kernel, nthreads, *args):
    """Call ``kernel(w, *args)`` for ``w`` in ``range(nthreads)`` concurrently."""
    if nthreads <= 1:
        return [kernel(0, *args)]
    pool = _pool(nthreads - 1)
    futures = [pool.submit(kernel, w, *args) for w in range(1, nthreads)]
    first = kernel(0, *args)
    return [first] + [f.result() for f in futures]


def specialize(kernel, *args):
    """Compiled entry point of ``kernel`` for the types of ``args``.

    Calling it skips per-call type dispatch, which dominates when a kernel
    with many array arguments runs once per peel round.
    """
    types = tuple(kernel.typeof_pyval(a) for a in args)
    return kernel.compile(types)


class EntryCache(dict):
    """Per-run memo of specialized entry points; argument types must not change between calls."""

    def get_entry(self, kernel, *args):
        ep = self.get(kernel)
        if ep is None:
            ep = self[kernel] = specialize(kernel, *args)
        return ep

    def __call__(self, kernel, *args):
        return self.get_entry(kernel, *args)(*args)


def chunk_size(total, nthreads, lo=1, hi=1024):
    """Grain for dynamic scheduling: about eight chunks per worker."""
    c = total // (8 * max(nthreads, 1))
    return max(lo, min(hi, c))
