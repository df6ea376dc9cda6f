import pytest

from latrans.counting import count_exact
from latrans.errors import TooLarge
from latrans.hypercube import (
    HypercubeTransversal,
    count_transversals_brute,
    from_square,
    group_hypercube,
    iter_hypercube_transversals,
    permutation_hypercube,
    validate_hypercube,
)
from latrans.latin import cyclic_square, uniform_random_square
from oracles import naive_hypercube_count


def test_from_square_c3():
    h = from_square(cyclic_square(3))
    assert h.dim == 2
    assert h.ones == {(i, j, (i + j) % 3) for i in range(3) for j in range(3)}


def test_from_square_c1():
    assert from_square(cyclic_square(1)).ones == {(0, 0, 0)}


def test_from_random_square():
    h = from_square(uniform_random_square(5, 9))
    assert len(h.ones) == 25 and validate_hypercube(h).valid


def test_from_square_uses_offset():
    h = from_square(cyclic_square(3).shifted(6))
    assert h.ones == from_square(cyclic_square(3)).ones


def test_validate_c4():
    assert validate_hypercube(from_square(cyclic_square(4))).valid


def test_validate_missing_element():
    h = from_square(cyclic_square(3)).without((0, 0, 0))
    rep = validate_hypercube(h)
    assert not rep.valid
    assert any(v.kind == "line-count" and v.count == 0 for v in rep.violations)


def test_group_z2_squared():
    h = group_hypercube(2, 3, "xor")
    assert len(h.ones) == 8 and validate_hypercube(h).valid


@pytest.mark.parametrize("n,d,group", [(4, 3, "cyclic"), (4, 3, "xor"), (3, 3, "cyclic"), (5, 2, "cyclic")])
def test_hyperplane_regularity(n, d, group):
    h = group_hypercube(n, d, group)
    assert validate_hypercube(h).valid
    for i in range(n):
        for axis in range(d + 1):
            assert len(h.hyperplane(i, axis)) == n ** (d - 1)


def test_permutation_matrix_has_one_transversal():
    assert count_transversals_brute(permutation_hypercube([2, 0, 3, 1])) == 1


def test_brute_c3_c4():
    assert count_transversals_brute(from_square(cyclic_square(3))) == 3
    assert count_transversals_brute(from_square(cyclic_square(4))) == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_round_trip_cyclic(n):
    sq = cyclic_square(n)
    assert count_transversals_brute(from_square(sq)) == count_exact(sq).count


def test_round_trip_random():
    for s in range(10):
        sq = uniform_random_square(5, s)
        assert count_transversals_brute(from_square(sq)) == count_exact(sq).count


@pytest.mark.parametrize("n,d,group", [(2, 3, "xor"), (3, 3, "cyclic"), (4, 3, "cyclic"), (3, 2, "cyclic")])
def test_brute_matches_product_oracle(n, d, group):
    h = group_hypercube(n, d, group)
    assert count_transversals_brute(h) == naive_hypercube_count(h.ones, n, d)


def test_transversals_are_valid():
    h = group_hypercube(4, 3)
    xs = list(iter_hypercube_transversals(h))
    assert xs and all(x.is_valid_for(h) for x in xs)
    bogus = HypercubeTransversal.of([(0, 0, 0, 0), (1, 0, 1, 1), (2, 2, 2, 2), (3, 3, 3, 3)])
    assert not bogus.is_valid_for(h)


def test_guard():
    with pytest.raises(TooLarge):
        count_transversals_brute(from_square(cyclic_square(9)))
    with pytest.raises(TooLarge):
        count_transversals_brute(group_hypercube(2, 4, "xor"))
