"""Bowen orbit metrics, spanning/separated counts and entropy estimates."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._util import parallel_map
from .complex import _num_json
from .maps import SampledSelfMap
from .metric import FiniteMetricSpace, Number

ORACLE_MAX_N = 64
ORACLE_MAX_HORIZON = 4
BRUTE_FORCE_MAX_N = 20
MIN_FIT_POINTS = 3


class EntropyError(ValueError):
    pass


class EntropySaturationError(EntropyError):
    """Every scale saturates before enough horizons are available for a fit."""


class OracleTooLargeError(EntropyError):
    pass


class OrbitMetricContext:
    """Orbit table ``orbit[k, i] = f^k(i)`` for ``k < n``; Bowen distances on demand."""

    def __init__(self, space: FiniteMetricSpace, fmap: SampledSelfMap, n: int):
        if n < 1:
            raise EntropyError("horizon must be positive")
        if fmap.space.N != space.N:
            raise EntropyError("map and space sizes differ")
        rows = [np.arange(space.N, dtype=np.intp)]
        for _ in range(n - 1):
            rows.append(fmap.image[rows[-1]])
        orbit = np.stack(rows)
        orbit.setflags(write=False)
        self.space = space
        self.map = fmap
        self.n = n
        self.orbit = orbit

    def truncated(self, n: int) -> "OrbitMetricContext":
        """Context for a shorter horizon sharing this orbit table."""
        if not 1 <= n <= self.n:
            raise EntropyError(f"horizon {n} outside 1..{self.n}")
        ctx = object.__new__(OrbitMetricContext)
        ctx.space, ctx.map, ctx.n, ctx.orbit = self.space, self.map, n, self.orbit[:n]
        return ctx

    def raw_row(self, i: int) -> np.ndarray:
        """Raw Bowen distances from point ``i`` to every point."""
        d = self.space.dist
        o = self.orbit
        return d[o[:, i][:, None], o].max(axis=0)

    def raw_matrix(self) -> np.ndarray:
        d = self.space.dist
        out = d[np.ix_(self.orbit[0], self.orbit[0])]
        for row in self.orbit[1:]:
            out = np.maximum(out, d[np.ix_(row, row)])
        return out


def bowen_distance(ctx: OrbitMetricContext, i: int, j: int) -> Number:
    o = ctx.orbit
    return ctx.space.value(ctx.space.dist[o[:, i], o[:, j]].max())


def greedy_centers(ctx: OrbitMetricContext, eps: Number) -> list[int]:
    """Index-order scan keeping each point with Bowen distance ``>= eps`` to all kept points.

    The kept set is simultaneously (n, eps)-separated and, being maximal,
    (n, eps)-spanning.
    """
    if not eps > 0:
        raise EntropyError("scale must be positive")
    t = ctx.space.threshold(eps)
    covered = np.zeros(ctx.space.N, dtype=bool)
    centers = []
    i = 0
    while i < ctx.space.N:
        centers.append(i)
        covered |= ctx.raw_row(i) < t
        rest = np.flatnonzero(~covered[i + 1:])
        if not rest.size:
            break
        i += 1 + int(rest[0])
    return centers


def spanning_count(ctx: OrbitMetricContext, eps: Number) -> int:
    """Size of a greedy (n, eps)-spanning set; an upper bound for the minimum."""
    return len(greedy_centers(ctx, eps))


def separated_count(ctx: OrbitMetricContext, eps: Number) -> int:
    """Size of a greedy maximal (n, eps)-separated set; a lower bound for the maximum."""
    return len(greedy_centers(ctx, eps))


def _close_masks(ctx: OrbitMetricContext, eps: Number) -> list[int]:
    if ctx.space.N > ORACLE_MAX_N or ctx.n > ORACLE_MAX_HORIZON:
        raise OracleTooLargeError(f"exhaustive oracle limited to N <= {ORACLE_MAX_N}, n <= {ORACLE_MAX_HORIZON}")
    close = ctx.raw_matrix() < ctx.space.threshold(eps)
    return [sum(1 << int(j) for j in np.flatnonzero(row)) for row in close]


def _milp(close: np.ndarray, minimize_cover: bool) -> int:
    from scipy.optimize import Bounds, LinearConstraint, milp

    n = close.shape[0]
    if minimize_cover:
        cons = LinearConstraint(close.astype(float), lb=1, ub=np.inf)
        res = milp(np.ones(n), constraints=cons, integrality=np.ones(n), bounds=Bounds(0, 1))
    else:
        pairs = np.argwhere(np.triu(close, 1))
        a = np.zeros((len(pairs), n))
        a[np.arange(len(pairs)), pairs[:, 0]] = 1
        a[np.arange(len(pairs)), pairs[:, 1]] = 1
        cons = [LinearConstraint(a, lb=0, ub=1)] if len(pairs) else []
        res = milp(-np.ones(n), constraints=cons, integrality=np.ones(n), bounds=Bounds(0, 1))
    if not res.success:
        raise EntropyError(f"oracle solver failed: {res.message}")
    return int(round(abs(res.fun)))


def exact_spanning_number(ctx: OrbitMetricContext, eps: Number) -> int:
    """Minimum size of an (n, eps)-spanning set, by exhaustive search."""
    masks = _close_masks(ctx, eps)
    n = len(masks)
    if n > BRUTE_FORCE_MAX_N:
        return _milp(ctx.raw_matrix() < ctx.space.threshold(eps), True)
    full = (1 << n) - 1
    for k in range(1, n + 1):
        for combo in itertools.combinations(range(n), k):
            acc = 0
            for i in combo:
                acc |= masks[i]
            if acc == full:
                return k
    return n


def exact_separated_number(ctx: OrbitMetricContext, eps: Number) -> int:
    """Maximum size of an (n, eps)-separated set, by exhaustive search."""
    masks = _close_masks(ctx, eps)
    n = len(masks)
    if n > BRUTE_FORCE_MAX_N:
        return _milp(ctx.raw_matrix() < ctx.space.threshold(eps), False)
    best = 0

    def grow(start: int, chosen: int, blocked: int, size: int) -> None:
        nonlocal best
        best = max(best, size)
        if size + (n - start) <= best:
            return
        for i in range(start, n):
            if not blocked >> i & 1:
                grow(i + 1, chosen | 1 << i, blocked | masks[i], size + 1)

    grow(0, 0, 0, 0)
    return best


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope, written so that constant data gives exactly 0."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    dx = x - x.mean()
    return float((dx * (y - y[0])).sum() / (dx * dx).sum())


@dataclass(frozen=True)
class EntropyEstimate:
    eps_grid: tuple[Number, ...]
    n_grid: tuple[int, ...]
    spanning: tuple[tuple[int, ...], ...]  # [eps][n]
    separated: tuple[tuple[int, ...], ...]
    slopes: tuple[float | None, ...]
    windows: tuple[tuple[int, ...], ...]
    saturated: tuple[tuple[bool, ...], ...]
    h_est: float
    best_eps: Number
    N: int

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "eps_grid": [_num_json(e) for e in self.eps_grid],
            "n_grid": list(self.n_grid),
            "spanning": [list(r) for r in self.spanning],
            "separated": [list(r) for r in self.separated],
            "slopes": list(self.slopes),
            "windows": [list(w) for w in self.windows],
            "saturated": [list(r) for r in self.saturated],
            "h_est": self.h_est,
            "best_eps": _num_json(self.best_eps),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "n", "spanning", "separated", "saturated"])
        for a, eps in enumerate(self.eps_grid):
            for b, n in enumerate(self.n_grid):
                w.writerow([_num_json(eps), n, self.spanning[a][b], self.separated[a][b], int(self.saturated[a][b])])
        return buf.getvalue()


def estimate_entropy(space: FiniteMetricSpace, fmap: SampledSelfMap, eps_grid: Sequence[Number],
                     n_grid: Sequence[int], workers: int | None = None) -> EntropyEstimate:
    """Growth rate of greedy separated counts, maximised over the scale grid.

    For each scale the slope of ``log s_n`` against ``n`` is fitted over the
    horizons whose count is below ``N``; at least three are required.
    """
    eps_grid, n_grid = list(eps_grid), list(n_grid)
    if not eps_grid or not n_grid:
        raise EntropyError("empty grid")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])) or n_grid[0] < 1:
        raise EntropyError("n grid must be positive and increasing")
    ctx = OrbitMetricContext(space, fmap, n_grid[-1])
    jobs = [(e, n) for e in eps_grid for n in n_grid]
    counts = dict(zip(jobs, parallel_map(lambda job: len(greedy_centers(ctx.truncated(job[1]), job[0])), jobs, workers)))
    grid = tuple(tuple(counts[e, n] for n in n_grid) for e in eps_grid)
    saturated = tuple(tuple(c >= space.N for c in row) for row in grid)

    slopes: list[float | None] = []
    windows: list[tuple[int, ...]] = []
    for row, sat in zip(grid, saturated):
        keep = [k for k in range(len(n_grid)) if not sat[k]]
        windows.append(tuple(n_grid[k] for k in keep))
        if len(keep) < MIN_FIT_POINTS:
            slopes.append(None)
            continue
        slopes.append(fit_slope([n_grid[k] for k in keep], [math.log(row[k]) for k in keep]))
    fitted = [(s, e) for s, e in zip(slopes, eps_grid) if s is not None]
    if not fitted:
        raise EntropySaturationError(
            f"counts saturate at N={space.N} before {MIN_FIT_POINTS} horizons on every scale")
    best, best_eps = max(fitted, key=lambda t: t[0])
    return EntropyEstimate(tuple(eps_grid), tuple(n_grid), grid, grid, tuple(slopes), tuple(windows),
                           saturated, max(0.0, best), best_eps, space.N)
