import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nucleus import ParameterError, UpdateAggregator
from nucleus.aggregation import STRATEGIES


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(STRATEGIES), st.integers(1, 4), st.integers(1, 8),
       st.lists(st.lists(st.integers(0, 99), max_size=60), min_size=1, max_size=4))
def test_rounds_are_exact_sets(strategy, nthreads, block, rounds):
    agg = UpdateAggregator(strategy, 100, nthreads, block)
    for touched in rounds:
        agg.begin_round(bound=len(touched))
        first = []
        for j, idx in enumerate(touched):
            if agg.claim(idx, worker=j % nthreads):
                first.append(idx)
        U = agg.finalize()
        assert sorted(U.tolist()) == sorted(set(touched))
        assert sorted(first) == sorted(set(touched))


def test_list_buffer_reserves_blocks():
    agg = UpdateAggregator("list-buffer", 50, nthreads=2, block=4)
    agg.begin_round()
    agg.claim_many(np.arange(0, 10), worker=0)
    agg.claim_many(np.arange(10, 13), worker=1)
    U = agg.finalize()
    assert sorted(U.tolist()) == list(range(13))
    # 10 ids need 3 blocks of 4 and 3 ids need one more
    assert agg.blocks_reserved == 4


def test_stamps_reset_between_rounds():
    agg = UpdateAggregator("array", 10)
    agg.begin_round()
    assert agg.claim(3) and not agg.claim(3)
    agg.finalize()
    agg.begin_round()
    assert agg.claim(3)


def test_bad_parameters():
    with pytest.raises(ParameterError):
        UpdateAggregator("queue", 10)
    with pytest.raises(ParameterError):
        UpdateAggregator("list-buffer", 10, block=0)
