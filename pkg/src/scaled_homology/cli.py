"""Command-line interface.

Exit status: 0 on success, 1 on a structured domain failure (unstable tower,
over-expansive map, saturated entropy grid, failed verdict or axiom), 2 on
input and parse errors.  Errors are written to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io as _io
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .complex import HomologyError, build_complex, homology
from .entropy import EntropyError, EntropySaturationError, estimate_entropy
from .harness import (
    SYSTEMS,
    ExperimentConfig,
    SystemConfigError,
    _DEFAULT_PARAMS,
    axiom_suite,
    builtin_system,
    default_config,
    induced_matrix_csv,
    verify_entropy_bound,
)
from .io import InputError, dumps, read_distance_json, read_map_json, read_points_csv
from .maps import MapError, MapTooExpansiveError, SampledSelfMap, induced_on_homology, spectral_radius
from .metric import METRIC_KINDS, FiniteMetricSpace, MetricError, from_point_cloud
from .tower import TowerError, UnstableTowerError, build_tower, geometric_scales, lc_betti

EXIT_OK, EXIT_DOMAIN, EXIT_INPUT = 0, 1, 2


class DomainFailure(Exception):
    """Carries a report that was produced but describes a failed check."""

    def __init__(self, payload: dict):
        super().__init__(payload.get("error", "domain failure"))
        self.payload = payload


def parse_number(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not a number: {text!r}") from None


def parse_scales(text: str) -> list[Fraction]:
    """Comma list ``1.5,1.2`` or geometric shorthand ``start:ratio:count``."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError(f"geometric grid needs start:ratio:count, got {text!r}")
        try:
            count = int(parts[2])
        except ValueError:
            raise InputError(f"grid count must be an integer, got {parts[2]!r}") from None
        try:
            return geometric_scales(parse_number(parts[0]), parse_number(parts[1]), count)
        except TowerError as err:
            raise InputError(str(err)) from None
    return [parse_number(x) for x in text.split(",") if x.strip()]


def parse_ints(text: str) -> list[int]:
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"not an integer list: {text!r}") from None


def parse_params(items: Sequence[str] | None) -> dict[str, int]:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"--param expects key=value, got {item!r}")
        try:
            out[key.strip()] = int(value)
        except ValueError:
            raise InputError(f"parameter {key} must be an integer") from None
    return out


def _builtin_params(args) -> dict[str, int]:
    params = parse_params(args.param)
    if args.n is not None:
        first = next(iter(_DEFAULT_PARAMS[args.builtin]))
        params[first] = args.n
    return params


def load_inputs(args) -> tuple[FiniteMetricSpace, SampledSelfMap | None, dict[str, Any]]:
    """Space, optional map, and a description of the input with its digest."""
    given = [x for x in (args.points, args.dist, args.builtin) if x]
    if len(given) != 1:
        raise InputError("give exactly one of --points, --dist, --builtin")
    fmap = None
    if args.builtin:
        params = _builtin_params(args)
        space, fmap = builtin_system(args.builtin, params)
        ident = dumps({"builtin": args.builtin, "params": params}).encode()
        source = {"builtin": args.builtin, "params": params}
    else:
        path = Path(args.points or args.dist)
        if not path.exists():
            raise InputError(f"no such file: {path}")
        if args.points:
            space = from_point_cloud(read_points_csv(path, args.skip_header), args.metric)
        else:
            space = read_distance_json(path)
        ident = path.read_bytes()
        source = {"path": str(path)}
    if getattr(args, "map", None):
        mpath = Path(args.map)
        if not mpath.exists():
            raise InputError(f"no such file: {mpath}")
        fmap = read_map_json(mpath, space)
        ident += mpath.read_bytes()
    source["sha256"] = hashlib.sha256(ident).hexdigest()
    return space, fmap, source


def _scales(args, space_default: list | None = None) -> list:
    if args.scales:
        return parse_scales(args.scales)
    if args.scale:
        return [parse_number(args.scale)]
    if space_default is not None:
        return space_default
    raise InputError("give --scale or --scales")


def _config_for(args) -> ExperimentConfig:
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise InputError(f"config: {err}") from None
        config = ExperimentConfig.from_json(data)
    elif args.builtin:
        config = default_config(args.builtin, _builtin_params(args))
    else:
        config = ExperimentConfig("custom", {}, [], [Fraction("0.05"), Fraction("0.1"), Fraction("0.2")],
                                  list(range(1, 8)))
    if args.scales or args.scale:
        config.scales = _scales(args)
    if args.eps_grid:
        config.eps_grid = parse_scales(args.eps_grid)
    if args.n_grid:
        config.n_grid = parse_ints(args.n_grid)
    if args.maxdim is not None:
        config.max_dim = args.maxdim
    if args.min_window is not None:
        config.min_window = args.min_window
    if args.tolerance is not None:
        config.tolerance = args.tolerance
    if not config.scales:
        raise InputError("no scales configured; give --scales")
    return config


def _num(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else str(x)
    return x


# ------------------------------------------------------------------ commands

def cmd_betti(args) -> tuple[dict, dict, str]:
    space, _, source = load_inputs(args)
    scales = _scales(args)
    max_dim = 2 if args.maxdim is None else args.maxdim
    rows = []
    for s in scales:
        c = build_complex(space, s, max_dim)
        groups = [homology(c, n) for n in range(max_dim + 1)]
        rows.append({
            "scale": _num(s),
            "counts": [c.count(n) for n in range(max_dim + 1)],
            "ranks": [g.rank for g in groups[:max(max_dim, 1)]],
            "top_rank_upper_bound": groups[max_dim].rank,
            "homology": [g.to_json(c) for g in groups[:max(max_dim, 1)]] if args.representatives else None,
        })
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scale"] + [f"rank_H{n}" for n in range(max(max_dim, 1))])
    for r in rows:
        w.writerow([r["scale"]] + r["ranks"])
    config = {"scales": [_num(s) for s in scales], "max_dim": max_dim}
    return {"input": source, "config": config}, {"scales": rows}, buf.getvalue()


def cmd_tower(args) -> tuple[dict, dict, str]:
    space, _, source = load_inputs(args)
    default = default_config(args.builtin, _builtin_params(args)).scales if args.builtin else None
    scales = _scales(args, default)
    max_dim = 2 if args.maxdim is None else args.maxdim
    min_window = 3 if args.min_window is None else args.min_window
    tower = build_tower(space, scales, max_dim)
    meta = {"input": source, "config": {"scales": [_num(s) for s in scales], "max_dim": max_dim,
                                        "min_window": min_window, "lc": args.lc}}
    result = tower.to_json(min_window)
    if args.lc is not None:
        try:
            result["lc_betti"] = {str(n): lc_betti(tower, n, min_window) for n in args.lc}
        except UnstableTowerError as err:
            raise DomainFailure({**err.to_json(), **meta, "tower": result}) from None
    return meta, result, tower.to_csv()


def cmd_map(args) -> tuple[dict, dict, str]:
    space, fmap, source = load_inputs(args)
    if fmap is None:
        raise InputError("map needs --map or --builtin")
    default = default_config(args.builtin, _builtin_params(args)).scales if args.builtin else None
    scales = _scales(args, default)
    max_dim = 2 if args.maxdim is None else args.maxdim
    min_window = 3 if args.min_window is None else args.min_window
    dims = args.dim or [1]
    tower = build_tower(space, scales, max_dim)
    out, text = {}, ""
    for n in dims:
        try:
            m = induced_on_homology(fmap, tower, n, min_window)
        except (UnstableTowerError, MapTooExpansiveError) as err:
            payload = err.to_json() if isinstance(err, UnstableTowerError) else {"error": "map too expansive for tower",
                                                                               "message": str(err)}
            raise DomainFailure(payload) from None
        out[str(n)] = {**m.to_json(), "spectral_radius": spectral_radius(m),
                       "trace": _num(m.trace()) if m.shape[0] else 0,
                       "det": _num(m.det()) if m.shape[0] else 1}
        text += induced_matrix_csv(m.matrix)
    meta = {"input": source, "config": {"scales": [_num(s) for s in scales], "max_dim": max_dim,
                                        "min_window": min_window, "dims": dims}}
    return meta, {"induced": out, "modulus_table": [[_num(a), _num(b)] for a, b in fmap.modulus_table]}, text


def cmd_entropy(args) -> tuple[dict, dict, str]:
    space, fmap, source = load_inputs(args)
    if fmap is None:
        raise InputError("entropy needs --map or --builtin")
    config = _config_for_entropy(args)
    est = estimate_entropy(space, fmap, config["eps_grid"], config["n_grid"])
    meta = {"input": source, "config": {"eps_grid": [_num(e) for e in config["eps_grid"]],
                                        "n_grid": config["n_grid"]}}
    return meta, est.to_json(), est.to_csv()


def _config_for_entropy(args) -> dict:
    if args.builtin:
        base = default_config(args.builtin, _builtin_params(args))
        eps, ns = base.eps_grid, base.n_grid
    else:
        eps, ns = [Fraction("0.05"), Fraction("0.1"), Fraction("0.2")], list(range(1, 8))
    if args.eps_grid:
        eps = parse_scales(args.eps_grid)
    if args.n_grid:
        ns = parse_ints(args.n_grid)
    return {"eps_grid": eps, "n_grid": ns}


def cmd_verify(args) -> tuple[dict, dict, str]:
    if args.config and not (args.points or args.dist or args.builtin):
        data = json.loads(Path(args.config).read_text())
        args.builtin = data.get("system")
        if args.builtin not in SYSTEMS:
            raise InputError("config without inputs must name a builtin system")
        args.param = [f"{k}={v}" for k, v in (data.get("params") or {}).items()]
    space, fmap, source = load_inputs(args)
    if fmap is None:
        raise InputError("verify needs --map or --builtin")
    config = _config_for(args)
    meta = {"input": source, "config": config.to_json()}
    try:
        verdict = verify_entropy_bound(space, fmap, config)
    except UnstableTowerError as err:
        raise DomainFailure({**err.to_json(), **meta}) from None
    except MapTooExpansiveError as err:
        raise DomainFailure({"error": "map too expansive for tower", "message": str(err), **meta}) from None
    except EntropySaturationError as err:
        raise DomainFailure({"error": "entropy saturation", "message": str(err), **meta}) from None
    result = verdict.to_json()
    text = "h_est,log_rho,margin,pass\n" + f"{verdict.h_est},{verdict.log_rho},{verdict.margin},{int(verdict.passed)}\n"
    if not verdict.passed:
        raise DomainFailure({"error": "bound violated", **meta, "result": result})
    return meta, result, text


def cmd_axioms(args) -> tuple[dict, dict, str]:
    seed = 0 if args.seed is None else args.seed
    trials = 100 if args.trials is None else args.trials
    if trials < 1:
        raise InputError("--trials must be >= 1")
    report = axiom_suite(seed, trials)
    meta = {"input": None, "config": {"seed": seed, "trials": trials}}
    result = report.to_json()
    text = "axiom,passed,trials\n" + "".join(f"{k},{v},{trials}\n" for k, v in sorted(report.passed.items()))
    if not report.ok:
        raise DomainFailure({"error": "axiom failures", **meta, "result": result})
    return meta, result, text


COMMANDS = {
    "betti": cmd_betti,
    "tower": cmd_tower,
    "map": cmd_map,
    "entropy": cmd_entropy,
    "verify": cmd_verify,
    "axioms": cmd_axioms,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scaled-homology", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("input")
    src.add_argument("--points", help="CSV of coordinates, one point per row")
    src.add_argument("--metric", choices=METRIC_KINDS, default="euclidean", help="metric for --points")
    src.add_argument("--skip-header", action="store_true", help="ignore the first CSV row")
    src.add_argument("--dist", help="distance-matrix JSON")
    src.add_argument("--builtin", choices=SYSTEMS, help="built-in sampled system")
    src.add_argument("--n", type=int, help="size parameter of the built-in system")
    src.add_argument("--param", action="append", metavar="KEY=VALUE", help="extra built-in parameter")
    src.add_argument("--map", help="map JSON (lookup table or builtin)")
    opt = common.add_argument_group("options")
    opt.add_argument("--scale", help="single scale")
    opt.add_argument("--scales", help="comma list or start:ratio:count")
    opt.add_argument("--maxdim", type=int)
    opt.add_argument("--min-window", type=int)
    opt.add_argument("--eps-grid", help="entropy scales (comma list or start:ratio:count)")
    opt.add_argument("--n-grid", help="entropy horizons (comma list or lo:hi)")
    opt.add_argument("--seed", type=int)
    opt.add_argument("--trials", type=int)
    opt.add_argument("--tolerance", type=float)
    opt.add_argument("--config", help="experiment config JSON")
    opt.add_argument("--out", help="write the report here instead of stdout")
    opt.add_argument("--format", choices=("json", "csv"), default="json")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("betti", parents=[common], help="homology ranks at fixed scales").add_argument(
        "--representatives", action="store_true", help="include cycle representatives")
    sub.add_parser("tower", parents=[common], help="tower of scales and stability").add_argument(
        "--lc", type=int, action="append", metavar="N", help="require the lc-Betti number in dimension N")
    sub.add_parser("map", parents=[common], help="induced matrices and spectral radius").add_argument(
        "--dim", type=int, action="append", help="homology dimension (repeatable, default 1)")
    sub.add_parser("entropy", parents=[common], help="entropy estimate")
    sub.add_parser("verify", parents=[common], help="entropy bound verdict")
    sub.add_parser("axioms", parents=[common], help="randomised axiom suite")
    return parser


def _emit(args, meta: dict, result: dict, text: str) -> None:
    if args.format == "csv":
        out = text
    else:
        out = dumps({"tool": "scaled-homology", "version": __version__, "command": args.command, **meta,
                     "result": result})
    if args.out:
        Path(args.out).write_text(out)
    else:
        sys.stdout.write(out)


def _error(kind: str, message: str, **extra) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}, sort_keys=True) + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        meta, result, text = COMMANDS[args.command](args)
    except DomainFailure as failure:
        payload = {"tool": "scaled-homology", "version": __version__, "command": args.command, **failure.payload}
        if args.out and args.format == "json":
            Path(args.out).write_text(dumps(payload))
        sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
        return EXIT_DOMAIN
    except (UnstableTowerError, MapTooExpansiveError, EntropySaturationError) as err:
        _error(type(err).__name__, str(err))
        return EXIT_DOMAIN
    except (InputError, MetricError, SystemConfigError, TowerError, HomologyError, MapError, EntropyError,
            OSError, json.JSONDecodeError, KeyError) as err:
        _error("input", str(err))
        return EXIT_INPUT
    _emit(args, meta, result, text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
