import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nucleus import (BucketsExhausted, ContractViolation, DenseBuckets, OpenBuckets, ParameterError,
                     init_buckets, next_bucket, update_buckets)


class Model:
    """Plain dict reference: extract every id holding the minimum value."""

    def __init__(self, values, ids):
        self.val = dict(zip(ids, values))
        self.k = 0

    def next(self):
        k = min(self.val.values())
        ids = sorted(i for i, v in self.val.items() if v == k)
        for i in ids:
            del self.val[i]
        self.k = k
        return k, ids

    def update(self, ids, vals):
        for i, v in zip(ids, vals):
            self.val[i] = max(v, self.k)


@settings(max_examples=120, deadline=None)
@given(st.sampled_from(["open", "dense"]),
       st.lists(st.integers(0, 60), min_size=1, max_size=40),
       st.integers(0, 3), st.randoms(use_true_random=False))
def test_against_model(impl, values, gap, rnd):
    ids = [i * (gap + 1) for i in range(len(values))]
    B = init_buckets(np.array(values), impl, ids=np.array(ids))
    M = Model(values, ids)
    prev = -1
    while M.val:
        k, got = next_bucket(B)
        mk, mids = M.next()
        assert k == mk and sorted(got.tolist()) == mids
        assert k >= prev
        prev = k
        live = list(M.val)
        chosen = rnd.sample(live, min(len(live), rnd.randint(0, 5)))
        new = [max(0, M.val[i] + rnd.randint(-70, 5)) for i in chosen]
        update_buckets(B, list(zip(chosen, new)))
        M.update(chosen, new)
    assert B.exhausted()
    with pytest.raises(BucketsExhausted):
        next_bucket(B)
    assert [v for v, _ in B.history] == sorted(v for v, _ in B.history)


@pytest.mark.parametrize("impl", [OpenBuckets, DenseBuckets])
def test_updates_clamp_to_level(impl):
    B = impl(np.array([3, 5, 9]))
    assert B.next_bucket()[0] == 3
    B.update(np.array([2]), np.array([0]))
    k, ids = B.next_bucket()
    assert k == 3 and ids.tolist() == [2]
    assert B.next_bucket()[0] == 5


@pytest.mark.parametrize("impl", ["open", "dense"])
def test_contract_violations(impl):
    B = init_buckets(np.array([1, 2]), impl)
    _, ids = next_bucket(B)
    with pytest.raises(ContractViolation):
        update_buckets(B, [(int(ids[0]), 4)])
    with pytest.raises(ParameterError):
        B.update(np.array([1, 1]), np.array([1]))


def test_overflow_refill():
    # values far beyond the window go through the overflow bucket
    vals = np.array([0, 1000, 5000, 1000, 17])
    B = OpenBuckets(vals, window=4)
    seq = []
    while not B.exhausted():
        k, ids = B.next_bucket()
        seq.append((k, sorted(ids.tolist())))
    assert seq == [(0, [0]), (17, [4]), (1000, [1, 3]), (5000, [2])]


def test_bad_inputs():
    with pytest.raises(ParameterError):
        init_buckets(np.array([1]), "fibonacci")
    with pytest.raises(ParameterError):
        init_buckets(np.array([-1]))
    with pytest.raises(BucketsExhausted):
        next_bucket(init_buckets(np.zeros(0, np.int64)))


def test_array_pair_updates():
    B = init_buckets(np.array([4, 4, 4]), "dense")
    update_buckets(B, (np.array([0, 1]), np.array([2, 1])))
    assert next_bucket(B)[1].tolist() == [1]


def test_dense_grows_on_raised_values():
    B = DenseBuckets(np.array([0, 1]))
    assert B.next_bucket()[0] == 0
    B.update(np.array([1]), np.array([7]))
    assert B.next_bucket()[0] == 7
