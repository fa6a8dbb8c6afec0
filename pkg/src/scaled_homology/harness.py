"""Built-in sampled systems, the entropy-bound experiment and the axiom suite."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .complex import _num_json, build_complex, homology, long_exact_rank_check, relative_homology
from .entropy import EntropyEstimate, estimate_entropy
from .linalg import RationalMatrix
from .maps import InducedMatrix, SampledSelfMap, induced_on_homology, spectral_radius
from .metric import FiniteMetricSpace, Number, as_number, disjoint_union, from_point_cloud
from .tower import DEFAULT_MIN_WINDOW, build_tower, geometric_scales

SYSTEMS = ("circle_doubling", "circle_rotation", "cat_map", "interval_2_12", "set_B_2_14", "punctured_circle")

_DEFAULT_PARAMS: dict[str, dict[str, int]] = {
    "circle_doubling": {"N": 512},
    "circle_rotation": {"N": 256, "step": 1},
    "cat_map": {"N": 32},
    "interval_2_12": {"K": 8},
    "set_B_2_14": {"n_max": 6},
    "punctured_circle": {"N": 256, "gap_index": 0},
}


class SystemConfigError(ValueError):
    pass


def _int_param(params: dict, key: str, low: int) -> int:
    value = params[key]
    if isinstance(value, bool) or int(value) != value or value < low:
        raise SystemConfigError(f"parameter {key} must be an integer >= {low}, got {value!r}")
    return int(value)


def resolve_params(name: str, params: dict | None = None) -> dict[str, int]:
    if name not in SYSTEMS:
        raise SystemConfigError(f"unknown system {name!r}; expected one of {SYSTEMS}")
    params = dict(params or {})
    unknown = set(params) - set(_DEFAULT_PARAMS[name])
    if unknown:
        raise SystemConfigError(f"unknown parameters for {name}: {sorted(unknown)}")
    return {**_DEFAULT_PARAMS[name], **params}


def interval_points(K: int) -> list[Fraction]:
    return [Fraction(1, 2**k) for k in range(K + 1)] + [Fraction(0)]


def set_b_points(n_max: int) -> list[Fraction]:
    """``{m + i/m : 0 <= i < m}`` for ``1 <= m < n_max``, then ``n_max`` itself."""
    pts = [Fraction(m) + Fraction(i, m) for m in range(1, n_max) for i in range(m)]
    return pts + [Fraction(n_max)]


def builtin_system(name: str, params: dict | None = None) -> tuple[FiniteMetricSpace, SampledSelfMap]:
    """Exact sample of a named system and its self-map (identity for static sets)."""
    p = resolve_params(name, params)
    if name in ("circle_doubling", "circle_rotation"):
        n = _int_param(p, "N", 2)
        space = from_point_cloud([Fraction(j, n) for j in range(n)], "flat-circle")
        if name == "circle_doubling":
            image = [(2 * j) % n for j in range(n)]
        else:
            image = [(j + int(p["step"])) % n for j in range(n)]
        return space, SampledSelfMap(space, image)
    if name == "cat_map":
        n = _int_param(p, "N", 2)
        space = from_point_cloud([(Fraction(i, n), Fraction(j, n)) for i in range(n) for j in range(n)], "flat-torus")
        image = [((2 * i + j) % n) * n + (i + j) % n for i in range(n) for j in range(n)]
        return space, SampledSelfMap(space, image)
    if name == "interval_2_12":
        pts = interval_points(_int_param(p, "K", 1))
        space = from_point_cloud(pts, "euclidean", labels=[str(x) for x in pts])
    elif name == "set_B_2_14":
        pts = set_b_points(_int_param(p, "n_max", 1))
        space = from_point_cloud(pts, "euclidean", labels=[str(x) for x in pts])
    else:
        n = _int_param(p, "N", 3)
        gap = _int_param(p, "gap_index", 0)
        if gap >= n:
            raise SystemConfigError(f"gap_index {gap} outside 0..{n - 1}")
        keep = [j for j in range(n) if j != gap]
        space = from_point_cloud([Fraction(j, n) for j in keep], "flat-circle", labels=[str(j) for j in keep])
    return space, SampledSelfMap.identity(space)


@dataclass
class ExperimentConfig:
    system: str
    params: dict[str, int]
    scales: list[Number]
    eps_grid: list[Number]
    n_grid: list[int]
    max_dim: int = 2
    min_window: int = DEFAULT_MIN_WINDOW
    tolerance: float = 0.1

    def to_json(self) -> dict:
        out = asdict(self)
        out["scales"] = [_num_json(s) for s in self.scales]
        out["eps_grid"] = [_num_json(s) for s in self.eps_grid]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        base = default_config(data["system"], data.get("params"))
        for key in ("max_dim", "min_window", "n_grid"):
            if key in data:
                setattr(base, key, data[key])
        if "tolerance" in data:
            base.tolerance = float(data["tolerance"])
        for key in ("scales", "eps_grid"):
            if key in data:
                setattr(base, key, [as_number(str(x)) if isinstance(x, str) else x for x in data[key]])
        return base


_EPS_GRIDS = {
    "cat_map": ("0.1", "0.2", "0.3", "0.35"),
}
_N_GRIDS = {"cat_map": range(1, 9)}


def _sample_spacing(name: str, p: dict[str, int]) -> Fraction:
    if name in ("circle_doubling", "circle_rotation", "cat_map", "punctured_circle"):
        return Fraction(1, p["N"])
    if name == "interval_2_12":
        return Fraction(1, 2 ** p["K"])
    return Fraction(1, p["n_max"] - 1 if p["n_max"] > 1 else 1)


def default_config(name: str, params: dict | None = None) -> ExperimentConfig:
    """Per-system defaults: a five-step geometric tower from 3.5 sample spacings
    (6 for the punctured circle, to bridge the gap) and entropy grids."""
    p = resolve_params(name, params)
    start = (6 if name == "punctured_circle" else Fraction(7, 2)) * _sample_spacing(name, p)
    return ExperimentConfig(
        system=name,
        params=p,
        scales=geometric_scales(start, count=5),
        eps_grid=[Fraction(x) for x in _EPS_GRIDS.get(name, ("0.05", "0.1", "0.2"))],
        n_grid=list(_N_GRIDS.get(name, range(1, 8))),
    )


@dataclass(frozen=True)
class BoundVerdict:
    h_est: float
    log_rho: float
    margin: float
    passed: bool
    tolerance: float
    rho: float
    induced: InducedMatrix
    entropy: EntropyEstimate

    def to_json(self) -> dict:
        finite = math.isfinite(self.log_rho)
        best = self.entropy.eps_grid.index(self.entropy.best_eps)
        return {
            "h_est": self.h_est,
            "log_rho": self.log_rho if finite else None,
            "rho": self.rho,
            "margin": self.margin if finite else None,
            "pass": self.passed,
            "tolerance": self.tolerance,
            "provenance": {
                "induced": self.induced.to_json(),
                "fit_scale": _num_json(self.entropy.best_eps),
                "fit_window": list(self.entropy.windows[best]),
            },
            "entropy": self.entropy.to_json(),
        }


def verify_entropy_bound(space: FiniteMetricSpace, fmap: SampledSelfMap, config: ExperimentConfig) -> BoundVerdict:
    """Compare the entropy estimate with log of the spectral radius on stable H_1.

    Unstable towers, over-expansive maps and saturated entropy grids raise
    their structured errors instead of producing a verdict.
    """
    tower = build_tower(space, config.scales, config.max_dim)
    induced = induced_on_homology(fmap, tower, 1, config.min_window)
    rho = spectral_radius(induced)
    log_rho = math.log(rho) if rho > 0 else -math.inf
    est = estimate_entropy(space, fmap, config.eps_grid, config.n_grid)
    margin = est.h_est - log_rho
    return BoundVerdict(est.h_est, log_rho, margin, margin >= -config.tolerance, config.tolerance, rho, induced, est)


# ---------------------------------------------------------------- axiom suite

AXIOMS = ("boundary_squared", "acyclic_small_diameter", "additivity", "excision", "long_exact")


@dataclass
class AxiomReport:
    seed: int
    trials: int
    passed: dict[str, int] = field(default_factory=lambda: {a: 0 for a in AXIOMS})
    counterexamples: list[dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(v == self.trials for v in self.passed.values())

    def to_json(self) -> dict:
        return {"seed": self.seed, "trials": self.trials, "passed": dict(sorted(self.passed.items())),
                "ok": self.ok, "counterexamples": self.counterexamples}


def random_space(rng: np.random.Generator, n: int, box: float = 1.0) -> FiniteMetricSpace:
    """Uniform points in a square on a 1/1000 grid; euclidean distances."""
    pts = rng.integers(0, 1000, size=(n, 2)) * (box / 1000)
    return from_point_cloud(pts.tolist(), "euclidean")


def _pick_scale(rng: np.random.Generator, space: FiniteMetricSpace, lo: float = 0.1, hi: float = 0.4) -> float:
    d = space.dist[np.triu_indices(space.N, 1)]
    if not d.size:
        return 1.0
    q = float(np.quantile(d, rng.uniform(lo, hi)))
    return q if q > 0 else 1.0


def _boundary_squared(space: FiniteMetricSpace, eps: float) -> bool:
    from .complex import boundary_matrix

    c = build_complex(space, eps, 2)
    return (boundary_matrix(c, 1) @ boundary_matrix(c, 2)).is_zero()


def _acyclic(rng: np.random.Generator, n: int) -> tuple[bool, FiniteMetricSpace, float]:
    space = random_space(rng, n, box=float(rng.uniform(0.05, 1.0)))
    eps = float(space.dist.max()) * 1.01 + 1e-9
    c = build_complex(space, eps, 2)
    return all(homology(c, k, reduced=True).rank == 0 for k in range(2)), space, eps


def _additivity(rng: np.random.Generator, n: int) -> tuple[bool, FiniteMetricSpace, float]:
    k = max(1, n // 2)
    a, b = random_space(rng, k), random_space(rng, max(1, n - k))
    eps = _pick_scale(rng, a)
    union = disjoint_union([a, b], eps * 1.5)
    cu, ca, cb = (build_complex(s, eps, 2) for s in (union, a, b))
    ok = all(homology(cu, d).rank == homology(ca, d).rank + homology(cb, d).rank for d in range(2))
    return ok, union, eps


def _excision(rng: np.random.Generator, n: int) -> tuple[bool, FiniteMetricSpace, float, list[int], list[int]] | None:
    """Slab cover ``A = {x < hi}``, ``B = {x > lo}``; rejected unless X-B and X-A are eps-separated."""
    pts = rng.integers(0, 1000, size=(n, 2)) / 1000
    space = from_point_cloud(pts.tolist(), "euclidean")
    eps = _pick_scale(rng, space)
    lo, hi = sorted(rng.uniform(0.2, 0.8, size=2))
    x = pts[:, 0]
    a = [i for i in range(n) if x[i] < hi]
    b = [i for i in range(n) if x[i] > lo]
    not_b = [i for i in range(n) if x[i] <= lo]
    not_a = [i for i in range(n) if x[i] >= hi]
    if not a or not b or (not_a and not_b and space.dist[np.ix_(not_b, not_a)].min() <= eps):
        return None
    cx = build_complex(space, eps, 2)
    sub = space.subspace(b)
    cb = build_complex(sub, eps, 2)
    pos = {v: k for k, v in enumerate(b)}
    ab = [pos[i] for i in a if i in pos]
    ok = all(relative_homology(cb, ab, d).rank == relative_homology(cx, a, d).rank for d in range(2))
    return ok, space, eps, a, b


def _long_exact(rng: np.random.Generator, n: int) -> tuple[bool, FiniteMetricSpace, float, list[int]]:
    space = random_space(rng, n)
    eps = _pick_scale(rng, space)
    subset = sorted(int(i) for i in rng.choice(n, size=int(rng.integers(0, n + 1)), replace=False))
    rep = long_exact_rank_check(build_complex(space, eps, 2), subset, 2)
    return rep.passed, space, eps, subset


def axiom_suite(seed: int, trials: int, max_points: int = 40) -> AxiomReport:
    """Randomised checks of the homology axioms at a fixed scale (deterministic in ``seed``)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    report = AxiomReport(seed, trials)

    def record(axiom: str, ok: bool, space: FiniteMetricSpace, eps: float, **extra) -> None:
        if ok:
            report.passed[axiom] += 1
        else:
            report.counterexamples.append({"axiom": axiom, "eps": eps, "space": space.to_json(), **extra})

    for _ in range(trials):
        n = int(rng.integers(3, max_points + 1))
        space = random_space(rng, n)
        eps = _pick_scale(rng, space)
        record("boundary_squared", _boundary_squared(space, eps), space, eps)
        ok, space, eps = _acyclic(rng, min(n, 16))
        record("acyclic_small_diameter", ok, space, eps)
        ok, space, eps = _additivity(rng, n)
        record("additivity", ok, space, eps)
        while (found := _excision(rng, n)) is None:
            pass
        ok, space, eps, a, b = found
        record("excision", ok, space, eps, A=a, B=b)
        ok, space, eps, subset = _long_exact(rng, n)
        record("long_exact", ok, space, eps, A=subset)
    return report


def induced_matrix_csv(matrix: RationalMatrix) -> str:
    return "\n".join(",".join(str(x) for x in row) for row in matrix.rows) + "\n"


def hexagon(radius: float = 1.0) -> FiniteMetricSpace:
    return from_point_cloud([(radius * math.cos(k * math.pi / 3), radius * math.sin(k * math.pi / 3))
                             for k in range(6)], "euclidean")


def circle_space(n: int) -> FiniteMetricSpace:
    return from_point_cloud([Fraction(j, n) for j in range(n)], "flat-circle")


def torus_space(n: int) -> FiniteMetricSpace:
    return from_point_cloud([(Fraction(i, n), Fraction(j, n)) for i in range(n) for j in range(n)], "flat-torus")


def lc_betti_numbers(space: FiniteMetricSpace, scales: Sequence[Number], dims: Sequence[int] = (0, 1),
                     max_dim: int = 2, min_window: int = DEFAULT_MIN_WINDOW) -> tuple[int, ...]:
    from .tower import lc_betti

    tower = build_tower(space, scales, max_dim)
    return tuple(lc_betti(tower, n, min_window) for n in dims)
