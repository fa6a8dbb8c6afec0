"""Towers of scales: connecting maps, stability and lc-Betti numbers."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ._util import parallel_map
from .complex import ChainVector, HomologyError, HomologyGroup, ScaleComplex, _num_json, build_complex, homology
from .linalg import ColumnReduction, RationalMatrix
from .metric import FiniteMetricSpace, Number

DEFAULT_RATIO = Fraction(4, 5)
DEFAULT_MIN_WINDOW = 3


class TowerError(ValueError):
    pass


class UnstableTowerError(TowerError):
    """The tower never settles in the requested dimension; no limit is reported."""

    def __init__(self, dimension: int, rank_sequence: Sequence[int], window: Sequence[Number] = ()):
        self.dimension = dimension
        self.rank_sequence = list(rank_sequence)
        self.window = list(window)
        super().__init__(f"H_{dimension} is unstable over the tower (ranks {self.rank_sequence})")

    def to_json(self) -> dict:
        return {
            "error": "unstable",
            "dimension": self.dimension,
            "rank_sequence": self.rank_sequence,
            "window": [_num_json(s) for s in self.window],
        }


def geometric_scales(start: Number, ratio: Number = DEFAULT_RATIO, count: int = 5) -> list[Number]:
    """``start * ratio**k`` for ``k < count``; exact when both inputs are rational."""
    if not 0 < ratio < 1:
        raise TowerError("ratio must lie in (0, 1)")
    return [start * ratio**k for k in range(count)]


def include_chain(chain: ChainVector, source: ScaleComplex, target: ScaleComplex) -> dict[int, int]:
    """Re-index a chain of ``source`` as a chain of ``target`` (which must contain its simplices)."""
    level = source.simplices[chain.dimension]
    idx = target.index(chain.dimension)
    try:
        return {idx[level[j]]: c for j, c in chain.coeffs.items()}
    except KeyError as err:
        raise TowerError(f"simplex {err.args[0]} is missing at scale {target.scale}") from None


def homology_map(source: HomologyGroup, source_complex: ScaleComplex,
                 target: HomologyGroup, target_complex: ScaleComplex) -> RationalMatrix:
    """Matrix of the map induced by inclusion, columns in the source basis."""
    cols = [target.coordinates(include_chain(c, source_complex, target_complex)) for c in source.cycle_basis]
    return RationalMatrix.from_columns(cols, target.rank)


class ScaleTower:
    """Complexes of one space over strictly decreasing scales.

    ``connecting[n][k]`` maps ``H_n`` at ``scales[k + 1]`` to ``H_n`` at
    ``scales[k]`` (fine to coarse).
    """

    def __init__(self, space: FiniteMetricSpace, scales: Sequence[Number], max_dim: int,
                 complexes: Sequence[ScaleComplex]):
        self.space = space
        self.scales = tuple(scales)
        self.max_dim = max_dim
        self.complexes = tuple(complexes)
        self.dims = range(max(max_dim, 1))
        self.groups = {(n, k): homology(c, n) for k, c in enumerate(self.complexes) for n in self.dims}
        self.connecting = {
            n: [homology_map(self.groups[n, k + 1], self.complexes[k + 1], self.groups[n, k], self.complexes[k])
                for k in range(len(self.scales) - 1)]
            for n in self.dims
        }

    def __repr__(self) -> str:
        return f"ScaleTower(scales={[str(s) for s in self.scales]}, max_dim={self.max_dim})"

    def position(self, scale: Number) -> int:
        for k, s in enumerate(self.scales):
            if s == scale:
                return k
        raise TowerError(f"scale {scale} is not in the tower")

    def rank_sequence(self, n: int) -> list[int]:
        return [self.groups[n, k].rank for k in range(len(self.scales))]

    def group(self, n: int, scale: Number) -> HomologyGroup:
        return self.groups[n, self.position(scale)]

    def complex_at(self, scale: Number) -> ScaleComplex:
        return self.complexes[self.position(scale)]

    def to_json(self, min_window: int = DEFAULT_MIN_WINDOW) -> dict:
        dims = {}
        for n in self.dims:
            rep = detect_stability(self, n, min_window)
            dims[str(n)] = {
                "rank_sequence": self.rank_sequence(n),
                "connecting_ranks": [m.rank() for m in self.connecting[n]],
                "stable": rep.stable,
                "stable_rank": rep.stable_rank,
                "window": [_num_json(s) for s in rep.window],
            }
        return {"scales": [_num_json(s) for s in self.scales], "max_dim": self.max_dim, "dimensions": dims}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scale"] + [f"rank_H{n}" for n in self.dims])
        for k, s in enumerate(self.scales):
            w.writerow([_num_json(s)] + [self.groups[n, k].rank for n in self.dims])
        return buf.getvalue()


def build_tower(space: FiniteMetricSpace, scales: Sequence[Number], max_dim: int = 2,
                workers: int | None = None) -> ScaleTower:
    scales = list(scales)
    if not scales:
        raise TowerError("empty scale list")
    if any(not s > 0 for s in scales):
        raise TowerError("scales must be positive")
    if any(a <= b for a, b in zip(scales, scales[1:])):
        raise TowerError("scales must be strictly decreasing")
    complexes = parallel_map(lambda s: build_complex(space, s, max_dim), scales, workers)
    return ScaleTower(space, scales, max_dim, complexes)


def connecting_map(tower: ScaleTower, n: int, from_scale: Number, to_scale: Number) -> RationalMatrix:
    """Map ``H_n`` at ``from_scale`` into ``H_n`` at the coarser ``to_scale``."""
    if from_scale > to_scale:
        raise TowerError("connecting maps run from a finer to a coarser scale")
    i, j = tower.position(from_scale), tower.position(to_scale)
    if n not in tower.dims:
        raise TowerError(f"dimension {n} is not tracked by the tower")
    if i == j:
        return RationalMatrix.identity(tower.groups[n, i].rank)
    return homology_map(tower.groups[n, i], tower.complexes[i], tower.groups[n, j], tower.complexes[j])


@dataclass(frozen=True)
class StabilityReport:
    dimension: int
    stable: bool
    stable_rank: int | None
    window: tuple[Number, ...]
    rank_sequence: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "stable": self.stable,
            "stable_rank": self.stable_rank,
            "window": [_num_json(s) for s in self.window],
            "rank_sequence": list(self.rank_sequence),
        }


def detect_stability(tower: ScaleTower, n: int, min_window: int = DEFAULT_MIN_WINDOW) -> StabilityReport:
    """Longest run of finest scales whose adjacent connecting maps are isomorphisms.

    The required window length is ``min(min_window, len(scales))``.
    """
    ranks = tower.rank_sequence(n)
    m = len(tower.scales)
    start = m - 1
    while start > 0 and tower.connecting[n][start - 1].is_invertible():
        start -= 1
    window = tower.scales[start:]
    stable = len(window) >= min(min_window, m)
    return StabilityReport(n, stable, ranks[-1] if stable else None, tuple(window), tuple(ranks))


def with_finest_scale(tower: ScaleTower) -> ScaleTower:
    """Tower extended by half the minimum positive distance, where complexes stop changing."""
    d = tower.space.min_positive_distance()
    if d is None:
        return tower
    finest = d / 2
    if finest >= tower.scales[-1]:
        return tower
    extra = build_complex(tower.space, finest, tower.max_dim)
    return ScaleTower(tower.space, tower.scales + (finest,), tower.max_dim, tower.complexes + (extra,))


def lc_betti(tower: ScaleTower, n: int, min_window: int = DEFAULT_MIN_WINDOW, exact_limit: bool = False) -> int:
    """Stable rank of ``H_n`` over the tower; raises :class:`UnstableTowerError` otherwise.

    With ``exact_limit`` the tower is first extended below the minimum
    positive distance, where every finite space is discrete.
    """
    if exact_limit:
        tower = with_finest_scale(tower)
    rep = detect_stability(tower, n, min_window)
    if not rep.stable:
        raise UnstableTowerError(n, rep.rank_sequence, rep.window)
    return rep.stable_rank


def _coboundary_rank(complex: ScaleComplex, n: int) -> int:
    """Rank of the coboundary from n-cochains to (n+1)-cochains."""
    if n < 0 or n >= complex.max_dim:
        return 0
    cofaces: list[dict[int, int]] = [{} for _ in range(complex.count(n))]
    for j in range(complex.count(n + 1)):
        for i, c in complex.face_column(n + 1, j).items():
            cofaces[i][j] = c
    return ColumnReduction(enumerate(cofaces)).rank


def cohomology_rank(complex: ScaleComplex, n: int) -> int:
    """Rank of rational cohomology via the transposed (coboundary) matrices."""
    if not 0 <= n < complex.max_dim:
        raise HomologyError(f"cohomology dimension {n} needs 0 <= n < max_dim={complex.max_dim}")
    return complex.count(n) - _coboundary_rank(complex, n) - _coboundary_rank(complex, n - 1)
