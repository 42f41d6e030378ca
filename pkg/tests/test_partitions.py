import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poissonkit.partitions import (
    SetPartition,
    SubordinationSpec,
    bell,
    bell_recurrence,
    count_subordinated,
    count_subordinated_bruteforce,
    enumerate_partitions,
    permanent,
    permanent_naive,
    stirling2,
)


def test_small_counts():
    assert len(list(enumerate_partitions(4))) == 15
    assert stirling2(4, 2) == 7
    assert [bell(n) for n in range(8)] == [1, 1, 2, 5, 15, 52, 203, 877]


@pytest.mark.parametrize("n", range(0, 9))
def test_bell_two_ways(n):
    assert bell(n) == bell_recurrence(n)
    if n:
        assert sum(1 for _ in enumerate_partitions(n)) == bell(n)


@pytest.mark.parametrize("n", range(1, 8))
def test_partitions_unique_and_counted_by_blocks(n):
    parts = list(enumerate_partitions(n))
    assert len(set(p.blocks for p in parts)) == len(parts)
    for k in range(n + 1):
        assert sum(1 for p in parts if len(p) == k) == stirling2(n, k)


def test_invalid_partition():
    with pytest.raises(ValueError):
        SetPartition(3, ((1, 2),))
    with pytest.raises(ValueError):
        SetPartition(2, ((1,), (1, 2)))


def test_subordinated_example():
    sigma = SetPartition(3, ((1, 2), (3,)))
    assert count_subordinated(SubordinationSpec(sigma, 4)) == 12
    assert count_subordinated_bruteforce(SubordinationSpec(sigma, 4)) == 12
    assert count_subordinated(SubordinationSpec(SetPartition(1, ((1,),)), 5)) == 5


@given(st.integers(1, 5), st.integers(1, 5), st.data())
def test_subordinated_matches_bruteforce(n, m, data):
    parts = list(enumerate_partitions(n))
    sigma = parts[data.draw(st.integers(0, len(parts) - 1))]
    spec = SubordinationSpec(sigma, m)
    if m >= len(sigma):
        assert count_subordinated(spec) == count_subordinated_bruteforce(spec)
    else:
        # by convention every function counts
        assert count_subordinated(spec) == m ** n


def test_permanent_known_values():
    assert permanent(np.ones((4, 4))) == pytest.approx(24)
    assert permanent(np.eye(5)) == pytest.approx(1)
    assert permanent(np.zeros((0, 0))) == 1
    assert permanent(np.array([[1, 2], [3, 4]])) == pytest.approx(10)


@given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
def test_ryser_matches_naive(n, seed):
    rng = np.random.default_rng(seed)
    G = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    assert abs(permanent(G) - permanent_naive(G)) < 1e-10 * max(1.0, abs(permanent_naive(G)))


def test_permanent_rejects_non_square():
    with pytest.raises(ValueError):
        permanent(np.ones((2, 3)))
