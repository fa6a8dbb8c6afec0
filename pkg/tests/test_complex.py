from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import betti, cliques, components, relative_betti
from scaled_homology.complex import (
    ChainVector,
    HomologyError,
    NotACycleError,
    boundary_matrix,
    build_complex,
    homology,
    long_exact_rank_check,
    relative_homology,
    subcomplex_homology,
)
from scaled_homology.harness import builtin_system
from scaled_homology.metric import diameter, from_distance_matrix, from_point_cloud

# small integer point sets in the plane give exact-enough float distances with many ties
spaces = st.lists(st.tuples(st.integers(0, 12), st.integers(0, 12)), min_size=1, max_size=14, unique=True).map(
    lambda pts: from_point_cloud([(Fraction(x), Fraction(y)) for x, y in pts]))
scales = st.integers(1, 10).map(lambda k: k * 1.5)


def test_collinear_examples(collinear):
    c = build_complex(collinear, 1.5, 2)
    assert c.simplices == (((0,), (1,), (2,)), ((0, 1), (1, 2)), ())
    assert build_complex(collinear, 0.5, 2).count(1) == 0


def test_hexagon_complex(hexagon):
    c = build_complex(hexagon, 1.2, 2)
    assert [c.count(n) for n in range(3)] == [6, 6, 0]
    assert [homology(c, n).rank for n in range(2)] == [1, 1]


def test_boundary_signs():
    s = from_point_cloud([0, 1, Fraction(1, 2)])
    c = build_complex(s, 2, 2)
    d1 = boundary_matrix(c, 1).to_dense()
    assert d1.column(c.index(1)[(0, 1)]) == [-1, 1, 0]
    d2 = boundary_matrix(c, 2)
    col = d2.columns[0]
    idx = c.index(1)
    assert col == {idx[(1, 2)]: 1, idx[(0, 2)]: -1, idx[(0, 1)]: 1}
    assert (boundary_matrix(c, 1) @ d2).is_zero()
    with pytest.raises(HomologyError):
        boundary_matrix(c, 3)


def test_single_point():
    c = build_complex(from_point_cloud([(0, 0)]), 1, 2)
    assert homology(c, 0).rank == 1
    assert homology(c, 1).rank == 0
    assert homology(c, 0, reduced=True).rank == 0


def test_top_dimension_flagged_inexact(hexagon):
    c = build_complex(hexagon, 1.2, 1)
    g = homology(c, 1)
    assert g.rank == 1 and not g.exact
    assert homology(c, 0).exact
    with pytest.raises(HomologyError):
        homology(c, 2)


def test_dyadic_sample_h0_matches_components():
    """H_0 of {1, 1/2, ..., 1/64, 0} at 1/16 counts strict 1/16-components.

    The tail 1/32, 1/64, 0 forms one component, so the count is 5.
    """
    space, _ = builtin_system("interval_2_12", {"K": 6})
    c = build_complex(space, Fraction(1, 16), 2)
    expected = components([[space.distance(i, j) for j in range(space.N)] for i in range(space.N)], Fraction(1, 16))
    assert homology(c, 0).rank == expected == 5
    assert homology(c, 1).rank == 0


def test_relative_examples(hexagon):
    c = build_complex(hexagon, 1.2, 2)
    assert all(relative_homology(c, range(6), n).rank == 0 for n in range(3))
    assert relative_homology(c, [0], 1).rank == 1
    two = from_point_cloud([0, 1])
    c2 = build_complex(two, 0.5, 2)
    assert relative_homology(c2, [0], 0).rank == 1
    with pytest.raises(HomologyError):
        relative_homology(c2, [5], 0)


def test_long_exact_examples(hexagon):
    two = from_point_cloud([0, 1])
    rep = long_exact_rank_check(build_complex(two, 0.5, 2), [0], 1)
    w = rep.windows[0]
    assert (w.rank_A, w.rank_X, w.rank_XA, w.rank_connecting) == (1, 2, 1, 0)
    assert rep.passed
    c = build_complex(hexagon, 1.2, 2)
    rep = long_exact_rank_check(c, [0], 2)
    assert rep.passed and len(rep.windows) == 2
    full = long_exact_rank_check(c, range(6), 2)
    assert full.passed
    assert all(w.rank_XA == 0 and w.rank_connecting == 0 and w.rank_A == w.rank_inclusion for w in full.windows)


def test_representatives_and_coordinates(hexagon):
    c = build_complex(hexagon, 1.2, 2)
    g = homology(c, 1)
    loop = g.cycle_basis[0]
    assert not c.boundary(loop)
    assert g.coordinates(loop) == [1]
    doubled = ChainVector(1, {k: 2 * v for k, v in loop.coeffs.items()})
    assert g.coordinates(doubled) == [2]
    with pytest.raises(NotACycleError):
        g.coordinates({0: 1})


def test_json_dump(hexagon):
    c = build_complex(hexagon, 1.2, 2)
    dump = c.to_json()
    assert dump["scale"] == 1.2 and dump["simplices"]["1"][0] == [0, 1]
    rep = homology(c, 1).to_json(c)
    assert rep["rank"] == 1
    assert all(set(t) == {"simplex", "numerator", "denominator"} for t in rep["representatives"][0])


def test_high_dimension_warns(hexagon):
    with pytest.warns(UserWarning):
        build_complex(hexagon, 1.2, 3)
    with pytest.raises(HomologyError):
        build_complex(hexagon, 0, 2)


@pytest.mark.filterwarnings("ignore:max_dim")
@given(spaces, scales)
def test_boundary_squared_zero(space, eps):
    c = build_complex(space, eps, 3)
    for n in range(1, c.max_dim):
        assert (boundary_matrix(c, n) @ boundary_matrix(c, n + 1)).is_zero()


@given(spaces, scales)
def test_complex_matches_brute_force_cliques(space, eps):
    c = build_complex(space, eps, 2)
    dist = space.dist.tolist()
    assert [list(level) for level in c.simplices] == cliques(dist, eps, 2)


@given(spaces, scales)
def test_ranks_match_dense_oracle(space, eps):
    c = build_complex(space, eps, 2)
    assert [homology(c, n).rank for n in range(2)] == betti(space.dist.tolist(), eps, 2)


@given(spaces, scales, st.data())
def test_relative_ranks_match_dense_oracle(space, eps, data):
    subset = data.draw(st.sets(st.integers(0, space.N - 1)))
    c = build_complex(space, eps, 2)
    assert [relative_homology(c, subset, n).rank for n in range(2)] == relative_betti(
        space.dist.tolist(), eps, subset, 2)


@given(spaces, scales)
def test_monotone_in_scale(space, eps):
    small, big = build_complex(space, eps, 2), build_complex(space, eps + 1, 2)
    for n in range(3):
        assert set(small.simplices[n]) <= set(big.simplices[n])


@given(spaces)
def test_small_diameter_is_acyclic(space):
    eps = diameter(space) + 0.5
    c = build_complex(space, eps, 2)
    assert all(homology(c, n, reduced=True).rank == 0 for n in range(2))


@pytest.mark.filterwarnings("ignore:max_dim")
@given(spaces, scales)
def test_euler_characteristic(space, eps):
    c = build_complex(space, eps, 3)
    if c.count(3) == 0:
        assert c.euler_characteristic() == sum((-1) ** n * homology(c, n).rank for n in range(3))


@given(spaces, scales)
def test_cycles_have_zero_boundary_and_are_independent(space, eps):
    c = build_complex(space, eps, 2)
    for n in range(2):
        g = homology(c, n)
        for k, z in enumerate(g.cycle_basis):
            assert not c.boundary(z)
            coords = g.coordinates(z)
            assert coords == [int(i == k) for i in range(g.rank)]


@given(spaces, scales, st.data())
def test_long_exact_windows_balance(space, eps, data):
    subset = data.draw(st.sets(st.integers(0, space.N - 1)))
    assert long_exact_rank_check(build_complex(space, eps, 2), subset, 2).passed


@given(spaces, scales, st.data())
def test_subcomplex_matches_subspace(space, eps, data):
    subset = sorted(data.draw(st.sets(st.integers(0, space.N - 1), min_size=1)))
    c = build_complex(space, eps, 2)
    sub = build_complex(space.subspace(subset), eps, 2)
    assert [subcomplex_homology(c, subset, n).rank for n in range(2)] == [homology(sub, n).rank for n in range(2)]


def test_exact_ties_excluded():
    space = from_distance_matrix([["0", "1/3"], ["1/3", "0"]])
    assert build_complex(space, Fraction(1, 3), 1).count(1) == 0
    assert build_complex(space, Fraction(1, 3) + Fraction(1, 10**15), 1).count(1) == 1
