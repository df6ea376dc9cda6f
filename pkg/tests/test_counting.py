import math

import numpy as np
import pytest

from latrans import _kernels
from latrans.counting import (
    _count_py,
    count_exact,
    enumerate_transversals,
    estimate_sis,
    has_transversal,
    sample_transversal,
)
from latrans.errors import InvalidSquare, TooLarge
from latrans.latin import cyclic_square, uniform_random_square
from latrans.bounds import upper_bound_log
from oracles import naive_count, naive_transversals

CYCLIC_COUNTS = [1, 0, 3, 0, 15, 0, 133]  # frozen from oracles.naive_count


@pytest.mark.parametrize("n", range(1, 8))
def test_cyclic_counts(n):
    sq = cyclic_square(n)
    assert naive_count(sq.cells.tolist()) == CYCLIC_COUNTS[n - 1]
    res = count_exact(sq)
    assert res.count == CYCLIC_COUNTS[n - 1]
    assert res.nodes_visited >= res.count
    assert res.count <= math.factorial(n)


def test_oracle_equivalence_sampled_corpus():
    for k in range(200):
        n = 1 + k % 6
        sq = uniform_random_square(n, 1000 + k)
        assert count_exact(sq).count == naive_count(sq.cells.tolist())


def test_python_fallback_agrees():
    for s in range(5):
        sq = uniform_random_square(7, s)
        cells = np.ascontiguousarray(sq.cells)
        assert _count_py(cells) == tuple(int(v) for v in _kernels.count_from(cells, 0, 0, 0, False))


@pytest.mark.parametrize("seed", range(4))
def test_parallel_equals_serial(seed):
    sq = uniform_random_square(9, seed)
    a = count_exact(sq)
    b = count_exact(sq, workers=4)
    assert (a.count, a.nodes_visited) == (b.count, b.nodes_visited)


def test_guard_and_override():
    big = uniform_random_square(15, 0)
    with pytest.raises(TooLarge):
        count_exact(big)
    with pytest.raises(TooLarge):
        has_transversal(big)
    assert has_transversal(big, max_order=15)


def test_invalid_square_rejected():
    with pytest.raises(InvalidSquare):
        count_exact(cyclic_square(3).with_cell(0, 0, 1))


class TestEnumerate:
    def test_c3(self):
        ts = enumerate_transversals(cyclic_square(3))
        assert [t.columns for t in ts] == [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
        assert [t.columns for t in ts] == naive_transversals(cyclic_square(3).cells.tolist())

    def test_c4_empty(self):
        assert enumerate_transversals(cyclic_square(4)) == []

    def test_c5_limit(self):
        ts = enumerate_transversals(cyclic_square(5), 2)
        assert len(ts) == 2 and all(t.is_valid_for(cyclic_square(5)) for t in ts)

    def test_lexicographic_and_consistent(self):
        for s in range(20):
            sq = uniform_random_square(6, s)
            ts = enumerate_transversals(sq)
            cols = [t.columns for t in ts]
            assert cols == sorted(cols) == naive_transversals(sq.cells.tolist())
            assert len(ts) == count_exact(sq).count


class TestHasTransversal:
    def test_c4(self):
        assert not has_transversal(cyclic_square(4))

    def test_c7(self):
        assert has_transversal(cyclic_square(7))

    def test_order1(self):
        assert has_transversal(cyclic_square(1))


class TestSIS:
    def test_c5_calibrated(self):
        e = estimate_sis(cyclic_square(5), 100_000, 1)
        assert abs(e.mean - 15) <= 3 * e.stderr

    def test_c4_dies(self):
        e = estimate_sis(cyclic_square(4), 10_000, 1)
        assert e.mean == 0 and e.stderr == 0 and e.log_mean == -math.inf

    def test_c7_calibrated(self):
        e = estimate_sis(cyclic_square(7), 100_000, 2)
        assert abs(e.mean - 133) <= 3 * e.stderr

    def test_mrv_calibrated(self):
        e = estimate_sis(cyclic_square(7), 100_000, 2, row_order="mrv")
        assert abs(e.mean - 133) <= 3 * e.stderr

    def test_reproducible_and_worker_independent(self):
        sq = uniform_random_square(8, 3)
        a = estimate_sis(sq, 20_000, 5)
        b = estimate_sis(sq, 20_000, 5, workers=3)
        assert a == b
        assert estimate_sis(sq, 20_000, 6) != a

    def test_rejects_tiny_sample(self):
        with pytest.raises(ValueError):
            estimate_sis(cyclic_square(3), 1, 0)

    def test_estimator_unbiased_over_50_runs(self):
        sq = uniform_random_square(7, 77)
        exact = count_exact(sq).count
        hits = 0
        for s in range(50):
            e = estimate_sis(sq, 2_000, s)
            hits += abs(e.mean - exact) <= 4 * e.stderr
        assert hits >= 45

    def test_allowed_mask_restricts(self):
        sq = cyclic_square(5)
        mask = np.ones((5, 5), dtype=bool)
        mask[0, 0] = False
        exact = sum(1 for t in enumerate_transversals(sq) if t.positions[0] != (0, 0))
        e = estimate_sis(sq, 100_000, 4, allowed=mask)
        assert abs(e.mean - exact) <= 4 * e.stderr


def test_sample_transversal():
    sq = uniform_random_square(30, 1)
    t = sample_transversal(sq, 9)
    assert t is not None and t.is_valid_for(sq)
    assert sample_transversal(sq, 9) == t
    assert sample_transversal(cyclic_square(4), 0, max_walks=500) is None


def test_counts_below_entropy_bound():
    for s in range(30):
        n = 5 + s % 5
        sq = uniform_random_square(n, s)
        c = count_exact(sq).count
        if c:
            assert math.log(c) <= upper_bound_log(2, n).log_upper
