import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from scaled_homology.complex import HomologyError, build_complex, homology
from scaled_homology.harness import builtin_system, circle_space
from scaled_homology.linalg import RationalMatrix
from scaled_homology.metric import from_point_cloud
from scaled_homology.tower import (
    TowerError,
    UnstableTowerError,
    build_tower,
    cohomology_rank,
    connecting_map,
    detect_stability,
    geometric_scales,
    lc_betti,
    with_finest_scale,
)

spaces = st.lists(st.tuples(st.integers(0, 10), st.integers(0, 10)), min_size=1, max_size=12, unique=True).map(
    lambda pts: from_point_cloud([(Fraction(x), Fraction(y)) for x, y in pts]))
scale_lists = st.lists(st.integers(2, 24), min_size=3, max_size=4, unique=True).map(
    lambda ks: sorted((Fraction(k, 2) for k in ks), reverse=True))


def test_hexagon_rank_sequences(hexagon):
    t = build_tower(hexagon, [1.5, 1.2, 1.05])
    assert t.rank_sequence(1) == [1, 1, 1]
    assert build_tower(hexagon, [1.5, 0.5]).rank_sequence(0) == [1, 6]


def test_single_point_tower():
    t = build_tower(from_point_cloud([(0, 0)]), [2, 1])
    assert t.rank_sequence(0) == [1, 1] and t.rank_sequence(1) == [0, 0]
    rep = detect_stability(t, 1)
    assert rep.stable and rep.stable_rank == 0


def test_scale_validation(hexagon):
    with pytest.raises(TowerError):
        build_tower(hexagon, [1.2, 1.5])
    with pytest.raises(TowerError):
        build_tower(hexagon, [1.2, 1.2])
    with pytest.raises(TowerError):
        build_tower(hexagon, [1.2, 0])
    with pytest.raises(TowerError):
        build_tower(hexagon, [])


def test_connecting_examples(hexagon):
    t = build_tower(hexagon, [1.5, 1.2, 1.05])
    assert connecting_map(t, 1, 1.2, 1.2) == RationalMatrix.identity(1)
    assert connecting_map(t, 1, 1.05, 1.2) == RationalMatrix.from_rows([[1]])
    t = build_tower(hexagon, [1.2, 0.5])
    assert connecting_map(t, 0, 0.5, 1.2) == RationalMatrix.from_rows([[1] * 6])
    with pytest.raises(TowerError):
        connecting_map(t, 0, 1.2, 0.5)
    with pytest.raises(TowerError):
        connecting_map(t, 0, 0.7, 1.2)


def test_stability_examples(hexagon):
    rep = detect_stability(build_tower(hexagon, [1.5, 1.2, 1.05]), 1)
    assert rep.stable and rep.stable_rank == 1
    rep = detect_stability(build_tower(hexagon, [1.5, 1.2, 0.5]), 0)
    assert not rep.stable and rep.window == (0.5,) and rep.rank_sequence == (1, 1, 6)
    assert rep.stable_rank is None


def test_lc_betti_examples(hexagon):
    assert lc_betti(build_tower(hexagon, [1.5, 1.2, 1.05]), 1) == 1
    with pytest.raises(UnstableTowerError) as info:
        lc_betti(build_tower(hexagon, [1.5, 0.5]), 0)
    assert info.value.rank_sequence == [1, 6]
    assert info.value.to_json()["error"] == "unstable"


def test_dyadic_sample_h1_vanishes():
    space, _ = builtin_system("interval_2_12", {"K": 8})
    t = build_tower(space, [Fraction(1, 2 ** (k + 1)) for k in range(7)])
    assert lc_betti(t, 1) == 0


def test_exact_limit_appends_discrete_scale(hexagon):
    t = build_tower(hexagon, [1.5, 1.2, 1.05])
    ext = with_finest_scale(t)
    assert ext.scales[-1] == pytest.approx(0.5)
    with pytest.raises(UnstableTowerError):
        lc_betti(t, 0, exact_limit=True)
    assert lc_betti(t, 0) == 1


def test_cohomology_examples(hexagon):
    assert cohomology_rank(build_complex(hexagon, 1.2, 2), 1) == 1
    assert cohomology_rank(build_complex(from_point_cloud([(0, 0)]), 1, 2), 1) == 0
    space, _ = builtin_system("interval_2_12", {"K": 6})
    c = build_complex(space, Fraction(1, 16), 2)
    assert cohomology_rank(c, 0) == homology(c, 0).rank
    with pytest.raises(HomologyError):
        cohomology_rank(c, 2)


def test_geometric_scales_exact():
    assert geometric_scales(Fraction(1), count=3) == [1, Fraction(4, 5), Fraction(16, 25)]
    with pytest.raises(TowerError):
        geometric_scales(1, 1.5)


def test_reports(hexagon):
    t = build_tower(hexagon, [1.5, 1.2, 1.05])
    rep = t.to_json()
    assert rep["dimensions"]["1"]["rank_sequence"] == [1, 1, 1]
    assert rep["dimensions"]["1"]["stable"] and rep["dimensions"]["1"]["connecting_ranks"] == [1, 1]
    assert t.to_csv().splitlines()[0] == "scale,rank_H0,rank_H1"


def test_threads_give_same_tower(hexagon, monkeypatch):
    monkeypatch.setenv("SCALED_HOMOLOGY_THREADS", "4")
    a = build_tower(circle_space(40), geometric_scales(Fraction(7, 80), count=4))
    monkeypatch.setenv("SCALED_HOMOLOGY_THREADS", "1")
    b = build_tower(circle_space(40), geometric_scales(Fraction(7, 80), count=4))
    assert a.to_json() == b.to_json()


@given(spaces, scale_lists)
def test_coherence(space, scales):
    t = build_tower(space, scales)
    for n in range(2):
        for i in range(len(scales)):
            for j in range(i, len(scales)):
                for k in range(j, len(scales)):
                    mu, nu, eps = scales[k], scales[j], scales[i]
                    assert connecting_map(t, n, mu, eps) == connecting_map(t, n, nu, eps) @ connecting_map(t, n, mu, nu)


@given(spaces, scale_lists)
def test_stability_window_has_invertible_maps(space, scales):
    t = build_tower(space, scales)
    for n in range(2):
        rep = detect_stability(t, n)
        k0 = len(scales) - len(rep.window)
        for k in range(k0, len(scales) - 1):
            m = t.connecting[n][k]
            assert m.is_square and m.det() != 0
        if rep.stable:
            assert rep.stable_rank == t.rank_sequence(n)[-1]


@given(spaces, scale_lists)
def test_cohomology_equals_homology(space, scales):
    for c in build_tower(space, scales).complexes:
        assert all(cohomology_rank(c, n) == homology(c, n).rank for n in range(2))


def _random_invertible(rng: random.Random, n: int) -> RationalMatrix:
    while True:
        m = RationalMatrix.from_rows([[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)])
        if m.is_invertible():
            return m


@given(spaces, scale_lists, st.integers(0, 10**6))
def test_rank_invariant_under_basis_change(space, scales, seed):
    rng = random.Random(seed)
    t = build_tower(space, scales)
    for n in range(2):
        changes = [_random_invertible(rng, t.groups[n, k].rank) for k in range(len(scales))]
        for k, m in enumerate(t.connecting[n]):
            conj = changes[k].inverse() @ m @ changes[k + 1]
            assert conj.rank() == m.rank()
        full = connecting_map(t, n, scales[-1], scales[0])
        conj = changes[0].inverse() @ full @ changes[-1]
        assert conj.rank() == full.rank()


@given(spaces, scale_lists, st.randoms())
def test_connecting_ranks_survive_point_permutation(space, scales, rnd):
    perm = list(range(space.N))
    rnd.shuffle(perm)
    a, b = build_tower(space, scales), build_tower(space.subspace(perm), scales)
    for n in range(2):
        assert [m.rank() for m in a.connecting[n]] == [m.rank() for m in b.connecting[n]]
        assert connecting_map(a, n, scales[-1], scales[0]).rank() == connecting_map(b, n, scales[-1], scales[0]).rank()
