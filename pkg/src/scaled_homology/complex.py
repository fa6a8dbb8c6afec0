"""Chain complexes of a finite metric space at a fixed scale.

At scale ``eps`` a vertex set spans a simplex iff all of its pairwise
distances are strictly below ``eps`` (the clique complex of the open
``eps``-proximity graph).  Homology is computed over the rationals by exact
column reduction, which also yields representative cycles and a coordinate
map from cycles to the chosen homology basis.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .linalg import Coeff, Column, ColumnReduction, RationalMatrix, SparseMatrix, axpy, exact_div
from .metric import FiniteMetricSpace, Number

Simplex = tuple[int, ...]


class HomologyError(ValueError):
    pass


class NotACycleError(HomologyError):
    pass


@dataclass(frozen=True)
class ChainVector:
    """A rational chain: simplex id (position in the complex's list) -> coefficient."""

    dimension: int
    coeffs: Mapping[int, Coeff]

    @classmethod
    def from_dict(cls, dimension: int, coeffs: Mapping[int, Coeff]) -> "ChainVector":
        return cls(dimension, {k: coeffs[k] for k in sorted(coeffs) if coeffs[k] != 0})

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def to_json(self, complex: "ScaleComplex | None" = None) -> list[dict]:
        out = []
        for k, c in sorted(self.coeffs.items()):
            q = Fraction(c)
            entry = {"simplex": list(complex.simplices[self.dimension][k]) if complex else k,
                     "numerator": q.numerator, "denominator": q.denominator}
            out.append(entry)
        return out


class ScaleComplex:
    """Clique complex of the strict ``scale``-proximity graph, up to ``max_dim``.

    ``simplices[n]`` is the lexicographically sorted list of ``n``-simplices,
    each an ascending tuple of point indices.
    """

    def __init__(self, space: FiniteMetricSpace, scale: Number, max_dim: int,
                 simplices: Sequence[Sequence[Simplex]]):
        self.space = space
        self.scale = scale
        self.max_dim = max_dim
        self.simplices: tuple[tuple[Simplex, ...], ...] = tuple(tuple(s) for s in simplices)
        self._solvers: dict[int, _HomologySolver] = {}

    def __repr__(self) -> str:
        counts = ", ".join(str(len(s)) for s in self.simplices)
        return f"ScaleComplex(scale={self.scale}, counts=[{counts}])"

    def count(self, n: int) -> int:
        return len(self.simplices[n]) if 0 <= n <= self.max_dim else 0

    def index(self, n: int) -> dict[Simplex, int]:
        return self._indices[n]

    @cached_property
    def _indices(self) -> list[dict[Simplex, int]]:
        return [{s: i for i, s in enumerate(level)} for level in self.simplices]

    def face_column(self, n: int, j: int, rows: Callable[[Simplex], bool] | None = None) -> Column:
        """Boundary of the ``j``-th ``n``-simplex; faces failing ``rows`` are dropped."""
        s = self.simplices[n][j]
        idx = self._indices[n - 1]
        col: Column = {}
        for i in range(n + 1):
            face = s[:i] + s[i + 1:]
            if rows is None or rows(face):
                col[idx[face]] = -1 if i % 2 else 1
        return col

    def boundary(self, chain: ChainVector) -> ChainVector:
        n = chain.dimension
        if n == 0:
            return ChainVector(-1, {})
        acc: Column = {}
        for j, c in chain.coeffs.items():
            axpy(acc, -c, self.face_column(n, j))
        return ChainVector.from_dict(n - 1, acc)

    def chain_from_simplices(self, n: int, terms: Mapping[Simplex, Coeff]) -> ChainVector:
        idx = self._indices[n]
        return ChainVector.from_dict(n, {idx[tuple(s)]: c for s, c in terms.items()})

    def euler_characteristic(self) -> int:
        return sum((-1) ** n * len(s) for n, s in enumerate(self.simplices))

    def homology(self, n: int, reduced: bool = False) -> "HomologyGroup":
        return homology(self, n, reduced)

    def solver(self, n: int) -> "_HomologySolver":
        if n not in self._solvers:
            if not 0 <= n <= self.max_dim:
                raise HomologyError(f"dimension {n} outside 0..{self.max_dim}")
            self._solvers[n] = _HomologySolver(self, n)
        return self._solvers[n]

    def to_json(self) -> dict:
        return {
            "scale": _num_json(self.scale),
            "max_dim": self.max_dim,
            "simplices": {str(n): [list(s) for s in level] for n, level in enumerate(self.simplices)},
        }


def _num_json(x: Number):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else str(x)
    return x


def build_complex(space: FiniteMetricSpace, scale: Number, max_dim: int = 2) -> ScaleComplex:
    """Enumerate all cliques of size ``<= max_dim + 1`` below ``scale``.

    Cliques grow by ordered extension: a simplex only extends by common
    neighbours with a larger index than its last vertex, so each clique is
    produced once and each level comes out lexicographically sorted.
    """
    if not scale > 0:
        raise HomologyError("scale must be positive")
    if max_dim < 0:
        raise HomologyError("max_dim must be non-negative")
    if max_dim > 2:
        warnings.warn(f"max_dim={max_dim}: clique counts grow combinatorially above dimension 2", stacklevel=2)
    adj = np.triu(space.below(scale), 1)
    up = [np.flatnonzero(row).tolist() for row in adj]
    upset = [set(u) for u in up]
    levels: list[list[Simplex]] = [[] for _ in range(max_dim + 1)]

    def extend(simplex: Simplex, cand: list[int]) -> None:
        depth = len(simplex)
        for k, w in enumerate(cand):
            s = simplex + (w,)
            levels[depth].append(s)
            if depth < max_dim:
                nxt = [x for x in cand[k + 1:] if x in upset[w]]
                if nxt:
                    extend(s, nxt)

    for v in range(space.N):
        levels[0].append((v,))
        if max_dim > 0 and up[v]:
            extend((v,), up[v])
    return ScaleComplex(space, scale, max_dim, levels)


def boundary_matrix(complex: ScaleComplex, n: int) -> SparseMatrix:
    """Matrix of the boundary map from ``n``-chains to ``(n-1)``-chains."""
    if not 1 <= n <= complex.max_dim:
        raise HomologyError(f"boundary dimension {n} outside 1..{complex.max_dim}")
    return SparseMatrix(complex.count(n - 1), tuple(complex.face_column(n, j) for j in range(complex.count(n))))


class _HomologySolver:
    """Basis of n-dimensional homology of a complex, a subcomplex or a quotient.

    ``cells(n)`` selects the simplices of the chain groups in play; faces that
    are not selected are dropped from boundaries, which realises the quotient
    complex when the selection is "not contained in A".
    """

    def __init__(self, complex: ScaleComplex, n: int, keep: Callable[[Simplex], bool] | None = None,
                 quotient: bool = False):
        self.complex = complex
        self.n = n
        self.keep = keep
        self.quotient = quotient
        cells = self._cells
        self.truncated = n >= complex.max_dim
        upper = cells(n + 1) if not self.truncated else []
        self.boundaries = ColumnReduction((j, complex.face_column(n + 1, j, keep)) for j in upper)
        lows = set(self.boundaries.pivots)
        if n == 0:
            self.cycles = {j: {j: 1} for j in cells(0) if j not in lows}
        else:
            red = ColumnReduction(((j, complex.face_column(n, j, keep)) for j in cells(n)), cleared=lows, track=True)
            self.cycles = {j: red.v[j] for j in red.zero if j not in lows}
        self.essential = sorted(self.cycles)
        self._position = {j: k for k, j in enumerate(self.essential)}

    def _cells(self, n: int) -> list[int]:
        if n > self.complex.max_dim or n < 0:
            return []
        level = self.complex.simplices[n]
        if self.keep is None:
            return list(range(len(level)))
        return [j for j, s in enumerate(level) if self.keep(s)]

    @property
    def rank(self) -> int:
        return len(self.essential)

    def coordinates(self, chain: Mapping[int, Coeff]) -> list[Coeff]:
        """Coordinates of the class of ``chain`` in the basis of essential cycles."""
        vec = {k: v for k, v in chain.items() if v != 0}
        if self.quotient:
            level = self.complex.simplices[self.n]
            vec = {k: v for k, v in vec.items() if self.keep(level[k])}
        coords: list[Coeff] = [0] * len(self.essential)
        pivots, reduced = self.boundaries.pivots, self.boundaries.reduced
        while vec:
            low = max(vec)
            col = pivots.get(low)
            if col is not None:
                other = reduced[col]
                axpy(vec, exact_div(vec[low], other[low]), other)
                continue
            pos = self._position.get(low)
            if pos is None:
                raise NotACycleError(f"chain is not a cycle in dimension {self.n}")
            f = vec[low]
            coords[pos] = f
            axpy(vec, f, self.cycles[low])
        return coords


@dataclass(frozen=True)
class HomologyGroup:
    """Rank and representative cycles of one rational homology group.

    ``exact`` is False when ``dimension == max_dim``: without the next
    boundary map the rank counts all cycles and only bounds the true rank
    from above.
    """

    dimension: int
    rank: int
    cycle_basis: tuple[ChainVector, ...]
    reduced: bool = False
    exact: bool = True
    scale: Number | None = None
    _solver: _HomologySolver | None = field(default=None, repr=False, compare=False)

    def coordinates(self, chain: ChainVector | Mapping[int, Coeff]) -> list[Coeff]:
        if self.reduced or self._solver is None:
            raise HomologyError("coordinates are only available for unreduced homology")
        coeffs = chain.coeffs if isinstance(chain, ChainVector) else chain
        return self._solver.coordinates(coeffs)

    def to_json(self, complex: ScaleComplex | None = None) -> dict:
        return {
            "dimension": self.dimension,
            "rank": self.rank,
            "reduced": self.reduced,
            "exact": self.exact,
            "representatives": [c.to_json(complex) for c in self.cycle_basis],
        }


def _group(solver: _HomologySolver, reduced: bool, scale) -> HomologyGroup:
    n = solver.n
    basis = tuple(ChainVector.from_dict(n, solver.cycles[j]) for j in solver.essential)
    rank = solver.rank
    if reduced and n == 0 and rank:
        rank -= 1
        first = solver.essential[0]
        basis = tuple(ChainVector.from_dict(0, {j: 1, first: -1}) for j in solver.essential[1:])
    return HomologyGroup(n, rank, basis, reduced, not solver.truncated, scale,
                         None if reduced and n == 0 else solver)


def homology(complex: ScaleComplex, n: int, reduced: bool = False) -> HomologyGroup:
    """Rational homology in dimension ``n``; ``reduced`` uses the augmented complex."""
    if n < 0 or n > complex.max_dim:
        raise HomologyError(f"dimension {n} outside 0..{complex.max_dim}")
    return _group(complex.solver(n), reduced, complex.scale)


def _vertex_set(complex: ScaleComplex, subset: Iterable[int]) -> frozenset[int]:
    a = frozenset(int(i) for i in subset)
    if any(i < 0 or i >= complex.space.N for i in a):
        raise HomologyError("subset index out of range")
    return a


def subcomplex_homology(complex: ScaleComplex, subset: Iterable[int], n: int) -> HomologyGroup:
    """Homology of the full subcomplex on ``subset`` (simplex ids stay those of ``complex``)."""
    a = _vertex_set(complex, subset)
    solver = _HomologySolver(complex, n, lambda s: a.issuperset(s))
    return _group(solver, False, complex.scale)


def relative_homology(complex: ScaleComplex, subset: Iterable[int], n: int) -> HomologyGroup:
    """Homology of the quotient complex C(X)/C(A) for the point subset ``A``."""
    a = _vertex_set(complex, subset)
    if n < 0 or n > complex.max_dim:
        raise HomologyError(f"dimension {n} outside 0..{complex.max_dim}")
    solver = _HomologySolver(complex, n, lambda s: not a.issuperset(s), quotient=True)
    return _group(solver, False, complex.scale)


@dataclass(frozen=True)
class ExactnessWindow:
    dimension: int
    rank_A: int
    rank_X: int
    rank_XA: int
    rank_inclusion: int
    rank_connecting: int
    balanced: bool

    @property
    def rank_kernel_inclusion(self) -> int:
        return self.rank_A - self.rank_inclusion


@dataclass(frozen=True)
class LongExactReport:
    windows: tuple[ExactnessWindow, ...]

    @property
    def passed(self) -> bool:
        return all(w.balanced for w in self.windows)


def long_exact_rank_check(complex: ScaleComplex, subset: Iterable[int], n_max: int) -> LongExactReport:
    """Check the rank bookkeeping implied by exactness of the pair sequence.

    For each ``n < n_max``:
    ``rk H_n(A) - rk H_n(X) + rk H_n(X,A) = rk(connecting) + rk ker(i_*)``,
    with the inclusion and connecting maps computed as matrices.
    """
    if n_max > complex.max_dim:
        raise HomologyError(f"n_max={n_max} needs a complex with max_dim >= {n_max}")
    a = _vertex_set(complex, subset)
    windows = []
    for n in range(n_max):
        h_a = subcomplex_homology(complex, a, n)
        h_x = homology(complex, n)
        h_xa = relative_homology(complex, a, n)
        inc = RationalMatrix.from_columns([h_x.coordinates(c) for c in h_a.cycle_basis], h_x.rank)
        if n == 0:
            conn_rank = 0
        else:
            h_a_lower = subcomplex_homology(complex, a, n - 1)
            cols = [h_a_lower.coordinates(complex.boundary(c)) for c in h_xa.cycle_basis]
            conn_rank = RationalMatrix.from_columns(cols, h_a_lower.rank).rank()
        inc_rank = inc.rank()
        lhs = h_a.rank - h_x.rank + h_xa.rank
        rhs = conn_rank + (h_a.rank - inc_rank)
        windows.append(ExactnessWindow(n, h_a.rank, h_x.rank, h_xa.rank, inc_rank, conn_rank, lhs == rhs))
    return LongExactReport(tuple(windows))
