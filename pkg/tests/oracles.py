"""Independent brute-force oracles used to cross-check the library."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def cliques(dist, eps, max_dim):
    """All vertex sets of size <= max_dim+1 with pairwise distances < eps, by exhaustion."""
    n = len(dist)
    out = []
    for k in range(1, max_dim + 2):
        level = [c for c in itertools.combinations(range(n), k)
                 if all(dist[a][b] < eps for a, b in itertools.combinations(c, 2))]
        out.append(level)
    return out


def boundary_dense(levels, k):
    rows = {s: i for i, s in enumerate(levels[k - 1])}
    m = np.zeros((len(levels[k - 1]), len(levels[k])), dtype=float)
    for j, s in enumerate(levels[k]):
        for i in range(len(s)):
            m[rows[s[:i] + s[i + 1:]], j] = (-1) ** i
    return m


def _rank(m):
    return int(np.linalg.matrix_rank(m)) if m.size else 0


def betti(dist, eps, max_dim):
    """Betti numbers 0..max_dim-1 from dense float ranks of brute-force boundary matrices."""
    levels = cliques(dist, eps, max_dim)
    ranks = [0] + [_rank(boundary_dense(levels, k)) for k in range(1, max_dim + 1)]
    return [len(levels[k]) - ranks[k] - ranks[k + 1] for k in range(max_dim)]


def components(dist, eps):
    """Connected components of the strict eps-graph via union-find."""
    n = len(dist)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if dist[i][j] < eps:
                parent[find(i)] = find(j)
    return len({find(i) for i in range(n)})


def relative_betti(dist, eps, subset, max_dim):
    """Ranks of the quotient complex by dropping simplices inside ``subset``."""
    a = set(subset)
    levels = [[s for s in lvl if not a.issuperset(s)] for lvl in cliques(dist, eps, max_dim)]
    ranks = [0]
    for k in range(1, max_dim + 1):
        rows = {s: i for i, s in enumerate(levels[k - 1])}
        m = np.zeros((len(levels[k - 1]), len(levels[k])))
        for j, s in enumerate(levels[k]):
            for i in range(len(s)):
                face = s[:i] + s[i + 1:]
                if face in rows:
                    m[rows[face], j] = (-1) ** i
        ranks.append(_rank(m))
    return [len(levels[k]) - ranks[k] - ranks[k + 1] for k in range(max_dim)]


def bowen(dist, image, n):
    """Dense Bowen matrix by direct iteration of the image table."""
    dist = np.asarray(dist)
    N = len(image)
    cur = np.arange(N)
    out = np.zeros_like(dist)
    for _ in range(n):
        out = np.maximum(out, dist[np.ix_(cur, cur)])
        cur = np.asarray(image)[cur]
    return out


def min_cover(close):
    n = len(close)
    for k in range(1, n + 1):
        for c in itertools.combinations(range(n), k):
            if all(any(close[i][j] for j in c) for i in range(n)):
                return k
    return n


def max_packing(close):
    n = len(close)
    for k in range(n, 0, -1):
        for c in itertools.combinations(range(n), k):
            if not any(close[a][b] for a, b in itertools.combinations(c, 2)):
                return k
    return 0


def char_poly_2x2(m):
    a, b = m[0]
    c, d = m[1]
    return [Fraction(1), -(a + d), a * d - b * c]
