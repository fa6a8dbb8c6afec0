"""Sampled self-maps: moduli of continuity, chain maps and induced homology matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .complex import ChainVector, HomologyGroup, ScaleComplex, Simplex, _num_json
from .linalg import Column, RationalMatrix, SparseMatrix, axpy
from .metric import METRIC_KINDS, FiniteMetricSpace, MetricError, Number
from .tower import DEFAULT_MIN_WINDOW, ScaleTower, UnstableTowerError, connecting_map, detect_stability


class MapError(ValueError):
    pass


class MapTooExpansiveError(MapError):
    """No target scale in reach: the image of a simplex is not a simplex."""


class SampledSelfMap:
    """A self-map of a finite metric space given by an image table.

    ``projection_error`` is set only for maps obtained by nearest-neighbour
    projection of an analytic map, and is the largest distance between a true
    image and the sample point chosen for it.
    """

    def __init__(self, space: FiniteMetricSpace, image: Sequence[int], projection_error: float | None = None):
        img = np.asarray(image, dtype=np.intp)
        if img.shape != (space.N,):
            raise MapError(f"image table has length {img.size}, expected {space.N}")
        if img.size and (img.min() < 0 or img.max() >= space.N):
            raise MapError("image index out of range")
        img.setflags(write=False)
        self.space = space
        self.image = img
        self.projection_error = projection_error
        self._modulus: dict[Number, Number] = {}

    def __repr__(self) -> str:
        return f"SampledSelfMap(N={self.space.N})"

    @classmethod
    def identity(cls, space: FiniteMetricSpace) -> "SampledSelfMap":
        return cls(space, range(space.N))

    @classmethod
    def from_projection(cls, space: FiniteMetricSpace, points, fn: Callable, metric_kind: str = "euclidean") -> "SampledSelfMap":
        """Apply ``fn`` to each coordinate vector and snap to the nearest sample.

        This is an approximation: the result only commutes with ``fn`` up to
        ``projection_error``.
        """
        if metric_kind not in METRIC_KINDS:
            raise MetricError(f"unknown metric kind {metric_kind!r}")
        pts = np.array([[float(c) for c in np.atleast_1d(p)] for p in points], dtype=float)
        imgs = np.array([np.atleast_1d(np.asarray(fn(p), dtype=float)) for p in pts], dtype=float)
        diff = np.abs(imgs[:, None, :] - pts[None, :, :])
        if metric_kind == "euclidean":
            d = np.sqrt((diff**2).sum(axis=2))
        else:
            diff = np.mod(diff, 1.0)
            d = np.minimum(diff, 1.0 - diff).max(axis=2)
        nearest = d.argmin(axis=1)
        return cls(space, nearest, float(d[np.arange(len(pts)), nearest].max()))

    def compose(self, other: "SampledSelfMap") -> "SampledSelfMap":
        """``other`` after ``self``."""
        if other.space is not self.space and other.space.N != self.space.N:
            raise MapError("maps act on different spaces")
        return SampledSelfMap(self.space, other.image[self.image])

    def power(self, k: int) -> "SampledSelfMap":
        if k < 0:
            raise MapError("negative power")
        out = SampledSelfMap.identity(self.space)
        for _ in range(k):
            out = out.compose(self)
        return out

    def modulus(self, eps: Number) -> Number:
        """Largest image distance over pairs at distance ``< eps`` (0 if there are none)."""
        if not eps > 0:
            raise MapError("modulus needs a positive scale")
        if eps not in self._modulus:
            mask = np.triu(self.space.below(eps), 1)
            if not mask.any():
                value = self.space.value(0)
            else:
                images = self.space.dist[np.ix_(self.image, self.image)]
                value = self.space.value(images[mask].max())
            self._modulus[eps] = value
        return self._modulus[eps]

    @property
    def modulus_table(self) -> list[tuple[Number, Number]]:
        return sorted(self._modulus.items())

    def to_json(self) -> dict:
        out = {"kind": "table", "image": self.image.tolist()}
        if self.projection_error is not None:
            out["projection_error"] = self.projection_error
        return out


def _sorted_sign(vertices: Sequence[int]) -> tuple[Simplex, int]:
    inversions = sum(1 for a in range(len(vertices)) for b in range(a + 1, len(vertices)) if vertices[a] > vertices[b])
    return tuple(sorted(vertices)), -1 if inversions % 2 else 1


def _check_scales(fmap: SampledSelfMap, source: ScaleComplex, target: ScaleComplex) -> None:
    if source.space.N != fmap.space.N or target.space.N != fmap.space.N:
        raise MapError("complexes and map live on different spaces")
    if target.max_dim < source.max_dim:
        raise MapError("target complex has smaller max_dim than the source")
    omega = fmap.modulus(source.scale)
    if source.max_dim > 0 and source.count(1) and not target.scale > omega:
        raise MapTooExpansiveError(
            f"target scale {target.scale} does not exceed the modulus {omega} at scale {source.scale}")


def simplex_image(fmap: SampledSelfMap, simplex: Simplex, target: ScaleComplex) -> tuple[int, int] | None:
    """Target simplex id and orientation sign, or None when vertices collide."""
    verts = [int(fmap.image[v]) for v in simplex]
    if len(set(verts)) < len(verts):
        return None
    s, sign = _sorted_sign(verts)
    try:
        return target.index(len(s) - 1)[s], sign
    except KeyError:
        raise MapTooExpansiveError(f"image {s} of simplex {simplex} is not a simplex at scale {target.scale}") from None


def chain_map(fmap: SampledSelfMap, source: ScaleComplex, target: ScaleComplex) -> dict[int, SparseMatrix]:
    """Matrices of ``f_#`` in every dimension up to the source's ``max_dim``."""
    _check_scales(fmap, source, target)
    out = {}
    for n in range(source.max_dim + 1):
        cols = []
        for s in source.simplices[n]:
            hit = simplex_image(fmap, s, target)
            cols.append({} if hit is None else {hit[0]: hit[1]})
        out[n] = SparseMatrix(target.count(n), tuple(cols))
    return out


def push_chain(fmap: SampledSelfMap, chain: ChainVector, source: ScaleComplex, target: ScaleComplex) -> dict[int, int]:
    level = source.simplices[chain.dimension]
    acc: Column = {}
    for j, c in chain.coeffs.items():
        hit = simplex_image(fmap, level[j], target)
        if hit is not None:
            axpy(acc, -c * hit[1], {hit[0]: 1})
    return acc


def homology_matrix(fmap: SampledSelfMap, source: ScaleComplex, source_group: HomologyGroup,
                    target: ScaleComplex, target_group: HomologyGroup) -> RationalMatrix:
    """Matrix of ``f_*`` from ``source_group`` to ``target_group`` (columns = source basis)."""
    _check_scales(fmap, source, target)
    cols = [target_group.coordinates(push_chain(fmap, c, source, target)) for c in source_group.cycle_basis]
    return RationalMatrix.from_columns(cols, target_group.rank)


@dataclass(frozen=True)
class InducedMatrix:
    dimension: int
    source_scale: Number
    target_scale: Number
    matrix: RationalMatrix
    modulus: Number | None = None
    window: tuple[Number, ...] = field(default=())

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def trace(self) -> Fraction:
        return self.matrix.trace()

    def det(self) -> Fraction:
        return self.matrix.det()

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "source_scale": _num_json(self.source_scale),
            "target_scale": _num_json(self.target_scale),
            "modulus": _num_json(self.modulus) if self.modulus is not None else None,
            "window": [_num_json(s) for s in self.window],
            "matrix": self.matrix.to_json(),
        }


def choose_scales(fmap: SampledSelfMap, window: Sequence[Number]) -> tuple[Number, Number] | None:
    """Finest source scale with a target scale in ``window`` above both it and its modulus."""
    for eps in sorted(window):
        omega = fmap.modulus(eps)
        for target in sorted(window):
            if target >= eps and target > omega:
                return eps, target
    return None


def induced_on_homology(fmap: SampledSelfMap, tower: ScaleTower, n: int,
                        min_window: int = DEFAULT_MIN_WINDOW) -> InducedMatrix:
    """Endomorphism of the stable ``H_n`` induced by ``fmap``.

    The image of the fine-scale basis is expressed at a coarser scale of the
    window and pulled back through the (invertible) connecting map, so the
    result is square in the fine-scale basis.
    """
    rep = detect_stability(tower, n, min_window)
    if not rep.stable:
        raise UnstableTowerError(n, rep.rank_sequence, rep.window)
    pair = choose_scales(fmap, rep.window)
    if pair is None:
        raise MapTooExpansiveError("map too expansive for tower: no window scale exceeds the modulus")
    eps, target = pair
    src, dst = tower.complex_at(eps), tower.complex_at(target)
    m = homology_matrix(fmap, src, tower.group(n, eps), dst, tower.group(n, target))
    conn = connecting_map(tower, n, eps, target)
    return InducedMatrix(n, eps, target, conn.inverse() @ m, fmap.modulus(eps), rep.window)


def characteristic_polynomial(matrix: RationalMatrix) -> list[Fraction]:
    """Monic coefficients of ``det(tI - M)``, highest degree first (Faddeev-LeVerrier)."""
    if not matrix.is_square:
        raise MapError("characteristic polynomial of a non-square matrix")
    n = matrix.ncols
    coeffs = [Fraction(1)]
    m = RationalMatrix.zeros(n, n)
    ident = RationalMatrix.identity(n)
    for k in range(1, n + 1):
        shifted = RationalMatrix.from_rows(
            [[a + coeffs[-1] * b for a, b in zip(ra, rb)] for ra, rb in zip(m.rows, ident.rows)], n)
        m = matrix @ shifted
        coeffs.append(-m.trace() / k)
    return coeffs


EXACT_LIMIT = 4


def _poly_radius(coeffs: Sequence[Fraction]) -> float:
    deg = len(coeffs) - 1
    if deg == 0:
        return 0.0
    if deg == 1:
        return float(abs(coeffs[1]))
    if deg == 2:
        b, c = coeffs[1], coeffs[2]
        disc = b * b - 4 * c
        if disc < 0:
            return math.sqrt(c)
        root = _exact_sqrt(disc)
        if root is not None:
            return float(max(abs(-b + root), abs(-b - root)) / 2)
        r = math.sqrt(disc)
        return max(abs(-float(b) + r), abs(-float(b) - r)) / 2
    return float(np.abs(np.roots([float(c) for c in coeffs])).max())


def _exact_sqrt(q: Fraction) -> Fraction | None:
    num, den = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if num * num == q.numerator and den * den == q.denominator:
        return Fraction(num, den)
    return None


def spectral_radius(matrix: InducedMatrix | RationalMatrix) -> float:
    """Largest eigenvalue modulus; 0 for the empty matrix.

    Up to 4x4 the exact characteristic polynomial is used; larger matrices
    fall back to floating-point eigenvalues.
    """
    m = matrix.matrix if isinstance(matrix, InducedMatrix) else matrix
    if not m.is_square:
        raise MapError("spectral radius of a non-square matrix")
    if m.ncols == 0:
        return 0.0
    if m.ncols <= EXACT_LIMIT:
        return _poly_radius(characteristic_polynomial(m))
    dense = np.array([[float(x) for x in r] for r in m.rows])
    return float(np.abs(np.linalg.eigvals(dense)).max())
