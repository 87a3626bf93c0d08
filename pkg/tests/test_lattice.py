import pytest
from hypothesis import given, strategies as st

from bdwalk.lattice import Orthant, enumerate_level, level_cardinality, norm, zero_count

from conftest import brute_level


@pytest.mark.parametrize("p, expected", [((0, 0), 0), ((1, 3, -1), 5), ((2, -2), 4)])
def test_norm(p, expected):
    assert norm(p) == expected


@pytest.mark.parametrize("p, expected", [((1, 0, 2, 0), 2), ((0, 0), 2), ((1, 1, 1), 0)])
def test_zero_count(p, expected):
    assert zero_count(p) == expected


def test_enumerate_examples():
    assert list(enumerate_level(2, 3, Orthant.NONNEGATIVE)) == [(3, 0), (2, 1), (1, 2), (0, 3)]
    assert list(enumerate_level(2, 1, Orthant.FULL)) == [(1, 0), (-1, 0), (0, 1), (0, -1)]
    assert list(enumerate_level(3, 0, Orthant.FULL)) == [(0, 0, 0)]


def test_cardinality_examples():
    assert level_cardinality(2, 3, Orthant.NONNEGATIVE) == 4
    assert level_cardinality(2, 1, Orthant.FULL) == 4
    assert level_cardinality(3, 2, Orthant.FULL) == 18


@pytest.mark.parametrize("orthant", list(Orthant))
def test_cardinality_matches_enumeration(orthant):
    for d in range(1, 5):
        for n in range(1, 13):
            assert level_cardinality(d, n, orthant) == len(list(enumerate_level(d, n, orthant)))


def test_full_level_matches_cube_scan():
    for d in range(1, 4):
        for n in range(0, 6):
            assert sorted(enumerate_level(d, n, Orthant.FULL)) == sorted(brute_level(d, n))


def test_large_cardinality_is_exact():
    # C(10**6 + 2, 2) for three nonnegative coordinates
    n = 10**6
    assert level_cardinality(3, n) == (n + 2) * (n + 1) // 2


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        list(enumerate_level(0, 2))
    with pytest.raises(ValueError):
        list(enumerate_level(2, -1))
    with pytest.raises(ValueError):
        level_cardinality(2, 0)


@given(st.integers(1, 4), st.integers(0, 8), st.sampled_from(list(Orthant)))
def test_level_points_are_distinct_with_norm_n(d, n, orthant):
    pts = list(enumerate_level(d, n, orthant))
    assert len(pts) == len(set(pts))
    assert all(norm(p) == n and len(p) == d for p in pts)
    assert all(zero_count(p) + sum(1 for x in p if x) == d for p in pts)
