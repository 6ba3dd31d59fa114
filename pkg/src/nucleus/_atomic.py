"""Hardware atomics usable from nopython kernels.

Numba has no CPU atomics, so these lower straight to LLVM ``atomicrmw`` and
``cmpxchg``. Kernels run with ``nogil=True`` from a Python thread pool, so the
atomics are what keep concurrent counter and slot updates correct.
"""
import numpy as np
from numba import njit, types
from numba.core import cgutils
from numba.extending import intrinsic


def _item_pointer(context, builder, arr_t, arr_v, idx_t, idx_v):
    ary = context.make_array(arr_t)(context, builder, arr_v)
    idx = context.cast(builder, idx_v, idx_t, types.intp)
    return cgutils.get_item_pointer(context, builder, arr_t, ary, [idx], wraparound=False)


@intrinsic
def atomic_add(typingctx, arr, idx, val):
    """``old = arr[idx]; arr[idx] += val`` atomically; returns ``old``."""
    if not isinstance(arr, types.Array) or not isinstance(arr.dtype, types.Integer):
        return None
    sig = arr.dtype(arr, idx, val)

    def codegen(context, builder, signature, args):
        arr_t, idx_t, val_t = signature.args
        ptr = _item_pointer(context, builder, arr_t, args[0], idx_t, args[1])
        v = context.cast(builder, args[2], val_t, arr_t.dtype)
        return builder.atomic_rmw("add", ptr, v, "seq_cst")

    return sig, codegen


@intrinsic
def atomic_cas(typingctx, arr, idx, expected, new):
    """Compare-and-swap ``arr[idx]`` from ``expected`` to ``new``; True on success."""
    if not isinstance(arr, types.Array) or not isinstance(arr.dtype, types.Integer):
        return None
    sig = types.boolean(arr, idx, expected, new)

    def codegen(context, builder, signature, args):
        arr_t, idx_t, exp_t, new_t = signature.args
        ptr = _item_pointer(context, builder, arr_t, args[0], idx_t, args[1])
        e = context.cast(builder, args[2], exp_t, arr_t.dtype)
        n = context.cast(builder, args[3], new_t, arr_t.dtype)
        res = builder.cmpxchg(ptr, e, n, "seq_cst", "seq_cst")
        return builder.extract_value(res, 1)

    return sig, codegen


@njit(nogil=True, cache=True)
def fetch_add(arr, idx, val):
    return atomic_add(arr, idx, val)


@njit(nogil=True, cache=True)
def compare_and_swap(arr, idx, expected, new):
    return atomic_cas(arr, idx, expected, new)


def atomic_counter(start=0):
    """One-cell int64 array used as a shared fetch-and-add cursor."""
    return np.full(1, start, dtype=np.int64)
