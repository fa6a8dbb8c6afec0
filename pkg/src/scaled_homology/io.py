"""File formats: point CSV, distance-matrix JSON, map descriptions and reports."""

from __future__ import annotations

import csv
import hashlib
import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .harness import builtin_system
from .maps import SampledSelfMap
from .metric import FiniteMetricSpace, MetricError, as_number, from_distance_matrix


class InputError(ValueError):
    pass


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def read_points_csv(path: str | Path, skip_header: bool = False) -> list[list]:
    """One point per row; decimal coordinates are parsed exactly."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        if skip_header:
            next(reader, None)
        for lineno, row in enumerate(reader, start=2 if skip_header else 1):
            cells = [c for c in row if c.strip()]
            if not cells:
                continue
            try:
                rows.append([as_number(c) for c in cells])
            except (ValueError, ZeroDivisionError):
                raise InputError(f"{path}:{lineno}: not a number in {row}") from None
    if not rows:
        raise InputError(f"{path}: no points")
    return rows


def write_points_csv(path: str | Path, points) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for p in points:
            w.writerow([str(c) for c in p])


def space_from_json(data: dict) -> FiniteMetricSpace:
    try:
        dist = data["dist"]
    except (KeyError, TypeError):
        raise InputError('distance JSON needs a "dist" array') from None
    den = data.get("denominator")
    if den is not None:
        if not isinstance(den, int) or den <= 0:
            raise InputError("denominator must be a positive integer")
        if any(not isinstance(x, int) for row in dist for x in row):
            raise InputError("with a denominator every distance must be an integer numerator")
        dist = [[Fraction(x, den) for x in row] for row in dist]
    try:
        return from_distance_matrix(dist, data.get("labels"))
    except MetricError as err:
        raise InputError(str(err)) from None


def read_distance_json(path: str | Path) -> FiniteMetricSpace:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise InputError(f"{path}: {err}") from None
    return space_from_json(data)


def write_distance_json(path: str | Path, space: FiniteMetricSpace) -> None:
    Path(path).write_text(dumps(space.to_json()))


def map_from_json(data: dict, space: FiniteMetricSpace) -> SampledSelfMap:
    """``{"kind": "table", "image": [...]}`` or ``{"kind": "builtin", "name": ..., "params": {...}}``."""
    kind = data.get("kind")
    if kind == "table":
        return SampledSelfMap(space, data["image"])
    if kind == "builtin":
        bspace, fmap = builtin_system(data["name"], data.get("params"))
        if bspace.N != space.N:
            raise InputError(f"builtin map acts on {bspace.N} points, space has {space.N}")
        return SampledSelfMap(space, fmap.image)
    raise InputError(f"unknown map kind {kind!r}")


def read_map_json(path: str | Path, space: FiniteMetricSpace) -> SampledSelfMap:
    try:
        return map_from_json(json.loads(Path(path).read_text()), space)
    except json.JSONDecodeError as err:
        raise InputError(f"{path}: {err}") from None


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
