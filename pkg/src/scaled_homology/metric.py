"""Finite metric spaces: construction, validation, nets and unions.

Distances are held either exactly, as an ``int64`` matrix of numerators over a
common positive denominator, or as ``float64``.  Every scale comparison in the
package goes through :meth:`FiniteMetricSpace.threshold`, which makes the
strict test ``d < eps`` exact for rational data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

Number = int | Fraction | float

METRIC_KINDS = ("euclidean", "flat-circle", "flat-torus")
_INT64_SAFE = 2**62


class MetricError(ValueError):
    """Invalid input for a metric-space construction."""


def _is_rational(x) -> bool:
    return isinstance(x, Rational) and not isinstance(x, bool)


def as_number(x) -> Number:
    """Parse a scale or coordinate; decimal strings become exact fractions."""
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("boolean is not a number")
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


class FiniteMetricSpace:
    """A labeled finite point set with a distance matrix.

    Instances are immutable: the distance matrix is stored read-only.
    """

    def __init__(self, dist: np.ndarray, labels: Sequence[str] | None = None, denominator: int | None = None):
        dist = np.array(dist, dtype=np.int64 if denominator is not None else np.float64)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise MetricError(f"distance matrix must be square, got shape {dist.shape}")
        if denominator is not None and denominator <= 0:
            raise MetricError("denominator must be positive")
        dist.setflags(write=False)
        self.dist = dist
        self.denominator = denominator
        n = dist.shape[0]
        self.labels = tuple(str(i) for i in range(n)) if labels is None else tuple(str(x) for x in labels)
        if len(self.labels) != n:
            raise MetricError("label count does not match the distance matrix")

    @property
    def N(self) -> int:
        return self.dist.shape[0]

    def __len__(self) -> int:
        return self.N

    def __repr__(self) -> str:
        kind = f"exact/{self.denominator}" if self.is_exact else "float"
        return f"FiniteMetricSpace(N={self.N}, {kind})"

    @property
    def is_exact(self) -> bool:
        return self.denominator is not None

    def value(self, raw) -> Number:
        """Convert a raw matrix entry (or array max) to a distance value."""
        if self.is_exact:
            return Fraction(int(raw), self.denominator)
        return float(raw)

    def distance(self, i: int, j: int) -> Number:
        return self.value(self.dist[i, j])

    def threshold(self, eps: Number):
        """Raw bound ``t`` with ``dist < t`` iff the true distance is ``< eps``.

        On exact spaces a float scale is read as its shortest decimal repr,
        so ``0.1`` means one tenth.
        """
        if self.is_exact:
            if isinstance(eps, float):
                if not math.isfinite(eps):
                    return _INT64_SAFE if eps > 0 else -_INT64_SAFE
                eps = Fraction(repr(eps))
            return math.ceil(Fraction(eps) * self.denominator)
        return float(eps)

    def below(self, eps: Number) -> np.ndarray:
        """Boolean matrix of pairs at distance strictly below ``eps``."""
        return self.dist < self.threshold(eps)

    def subspace(self, indices: Iterable[int]) -> "FiniteMetricSpace":
        idx = np.asarray(list(indices), dtype=np.intp)
        if idx.size and (idx.min() < 0 or idx.max() >= self.N):
            raise MetricError("subspace index out of range")
        return FiniteMetricSpace(self.dist[np.ix_(idx, idx)], [self.labels[i] for i in idx], self.denominator)

    def min_positive_distance(self) -> Number | None:
        pos = self.dist[self.dist > 0]
        return self.value(pos.min()) if pos.size else None

    def distinct_distances(self) -> list[Number]:
        return [self.value(x) for x in np.unique(self.dist)]

    def to_json(self) -> dict:
        """``dist`` holds integers over ``denominator`` for exact spaces, plain floats otherwise."""
        out = {"labels": list(self.labels), "dist": self.dist.tolist()}
        if self.is_exact:
            out["denominator"] = self.denominator
        return out


@dataclass(frozen=True)
class Net:
    """Centers such that every point lies at distance ``< radius`` from one."""

    center_indices: tuple[int, ...]
    radius: Number

    def __len__(self) -> int:
        return len(self.center_indices)


@dataclass(frozen=True)
class Violation:
    kind: str  # "diagonal", "symmetry", "negative" or "triangle"
    indices: tuple[int, ...]
    message: str


def _exact_matrix(entries: list[list[Fraction]]) -> tuple[np.ndarray, int] | None:
    den = 1
    for row in entries:
        for x in row:
            den = math.lcm(den, x.denominator)
    nums = [[int(x * den) for x in row] for row in entries]
    if any(abs(v) >= _INT64_SAFE for row in nums for v in row):
        return None
    return np.array(nums, dtype=np.int64).reshape(len(entries), len(entries)), den


def from_distance_matrix(matrix, labels: Sequence[str] | None = None, check: bool = True) -> FiniteMetricSpace:
    """Build a space from a nested sequence of distances.

    All-rational input (ints, fractions, decimal strings) is stored exactly;
    any float entry switches the whole matrix to floating point.
    """
    if isinstance(matrix, np.ndarray) and matrix.dtype.kind == "f":
        space = FiniteMetricSpace(matrix, labels)
    else:
        rows = [[as_number(x) for x in row] for row in matrix]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise MetricError("distance matrix must be square")
        exact = None
        if all(_is_rational(x) for r in rows for x in r):
            exact = _exact_matrix([[Fraction(x) for x in r] for r in rows])
        if exact is None:
            space = FiniteMetricSpace(np.array([[float(x) for x in r] for r in rows], dtype=float).reshape(n, n), labels)
        else:
            space = FiniteMetricSpace(exact[0], labels, exact[1])
    if check:
        bad = validate(space, check_triangle=False)
        if bad:
            raise MetricError(f"invalid distance matrix: {bad[0].message}")
    return space


def from_point_cloud(points, metric_kind: str = "euclidean", labels: Sequence[str] | None = None) -> FiniteMetricSpace:
    """Distances between coordinate vectors under one of ``METRIC_KINDS``.

    ``flat-circle`` is the unit-circumference circle ``[0, 1)`` and
    ``flat-torus`` the square torus ``[0, 1)^2`` with the max of the per-axis
    circle distances.
    """
    if metric_kind not in METRIC_KINDS:
        raise MetricError(f"unknown metric kind {metric_kind!r}; expected one of {METRIC_KINDS}")
    pts = [[as_number(c) for c in (p if isinstance(p, (list, tuple, np.ndarray)) else [p])] for p in points]
    if not pts:
        raise MetricError("empty point cloud")
    dim = len(pts[0])
    if any(len(p) != dim for p in pts):
        raise MetricError("points have different dimensions")
    if metric_kind == "flat-circle" and dim != 1:
        raise MetricError("flat-circle needs 1-dimensional coordinates")
    if metric_kind == "flat-torus" and dim != 2:
        raise MetricError("flat-torus needs 2-dimensional coordinates")
    if metric_kind != "euclidean" and any(not (0 <= c < 1) for p in pts for c in p):
        raise MetricError("periodic coordinates must lie in [0, 1)")

    rational = all(_is_rational(c) for p in pts for c in p)
    if rational and (metric_kind != "euclidean" or dim == 1):
        den = 1
        for p in pts:
            for c in p:
                den = math.lcm(den, Fraction(c).denominator)
        coords = np.array([[int(Fraction(c) * den) for c in p] for p in pts], dtype=np.int64)
        diff = np.abs(coords[:, None, :] - coords[None, :, :])
        if metric_kind != "euclidean":
            diff = np.minimum(diff, den - diff)
        return FiniteMetricSpace(diff.max(axis=2), labels, den)

    coords = np.array([[float(c) for c in p] for p in pts], dtype=float)
    diff = np.abs(coords[:, None, :] - coords[None, :, :])
    if metric_kind == "euclidean":
        dist = np.sqrt((diff**2).sum(axis=2))
    else:
        dist = np.minimum(diff, 1.0 - diff).max(axis=2)
    return FiniteMetricSpace(dist, labels)


def validate(space: FiniteMetricSpace, check_triangle: bool = False) -> list[Violation]:
    """Diagnose metric axioms; an empty list means all checks hold."""
    d = space.dist
    out: list[Violation] = []
    for i in np.flatnonzero(np.diag(d) != 0):
        out.append(Violation("diagonal", (int(i),), f"dist[{i}][{i}] = {space.value(d[i, i])} != 0"))
    for i, j in zip(*np.nonzero(np.triu(d != d.T, 1))):
        out.append(Violation("symmetry", (int(i), int(j)),
                             f"dist[{i}][{j}] = {space.value(d[i, j])} != dist[{j}][{i}] = {space.value(d[j, i])}"))
    for i, j in zip(*np.nonzero(d < 0)):
        out.append(Violation("negative", (int(i), int(j)), f"dist[{i}][{j}] = {space.value(d[i, j])} < 0"))
    if check_triangle:
        slack = 0 if space.is_exact else 1e-12 * max(float(np.abs(d).max(initial=0)), 1.0)
        n = space.N
        for j in range(n):
            through = d[:, j][:, None] + d[j, :][None, :]
            bad = np.triu(d > through + slack, 1)
            for i, k in zip(*np.nonzero(bad)):
                if j in (i, k):
                    continue
                out.append(Violation(
                    "triangle", (int(i), j, int(k)),
                    f"d({i},{k}) = {space.value(d[i, k])} > d({i},{j}) + d({j},{k}) = {space.value(through[i, k])}",
                ))
    return out


def diameter(space: FiniteMetricSpace) -> Number:
    if space.N == 0:
        raise MetricError("diameter of an empty space")
    return space.value(space.dist.max())


def greedy_net(space: FiniteMetricSpace, delta: Number) -> Net:
    """Scan points in index order; keep a point unless a center is within ``< delta``."""
    if not delta > 0:
        raise MetricError("net radius must be positive")
    t = space.threshold(delta)
    centers: list[int] = []
    for i in range(space.N):
        if centers and (space.dist[i, centers] < t).any():
            continue
        centers.append(i)
    return Net(tuple(centers), delta)


def disjoint_union(spaces: Sequence[FiniteMetricSpace], gap: Number) -> FiniteMetricSpace:
    """Block-diagonal union; every cross-block distance equals ``gap``."""
    if not spaces:
        raise MetricError("disjoint union of no spaces")
    if not gap > 0:
        raise MetricError("gap must be positive")
    if len(spaces) == 1:
        return spaces[0]
    sizes = [s.N for s in spaces]
    offsets = np.cumsum([0] + sizes)
    labels = [f"{k}:{lab}" for k, s in enumerate(spaces) for lab in s.labels]
    exact = all(s.is_exact for s in spaces) and _is_rational(as_number(gap))
    if exact:
        g = Fraction(as_number(gap))
        den = math.lcm(g.denominator, *(s.denominator for s in spaces))
        gap_raw = g * den
        if abs(gap_raw) < _INT64_SAFE:
            out = np.full((offsets[-1], offsets[-1]), int(gap_raw), dtype=np.int64)
            for k, s in enumerate(spaces):
                out[offsets[k]:offsets[k + 1], offsets[k]:offsets[k + 1]] = s.dist * (den // s.denominator)
            return FiniteMetricSpace(out, labels, den)
    out = np.full((offsets[-1], offsets[-1]), float(gap))
    for k, s in enumerate(spaces):
        block = s.dist / s.denominator if s.is_exact else s.dist
        out[offsets[k]:offsets[k + 1], offsets[k]:offsets[k + 1]] = block
    return FiniteMetricSpace(out, labels)
