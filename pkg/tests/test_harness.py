import json
import math
from fractions import Fraction

import pytest

from scaled_homology.complex import build_complex, relative_homology
from scaled_homology.harness import (
    AXIOMS,
    ExperimentConfig,
    SystemConfigError,
    axiom_suite,
    builtin_system,
    default_config,
    interval_points,
    lc_betti_numbers,
    set_b_points,
    verify_entropy_bound,
)
from scaled_homology.metric import disjoint_union


def test_builtin_examples():
    space, f = builtin_system("circle_doubling", {"N": 8})
    assert f.image.tolist() == [0, 2, 4, 6, 0, 2, 4, 6]
    assert space.distance(0, 5) == Fraction(3, 8)
    _, rot = builtin_system("circle_rotation", {"N": 5, "step": 2})
    assert rot.image.tolist() == [2, 3, 4, 0, 1]
    _, cat = builtin_system("cat_map", {"N": 3})
    assert sorted(cat.image.tolist()) == list(range(9))
    assert interval_points(3) == [1, Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), 0]
    assert set_b_points(4) == [1, 2, Fraction(5, 2), 3, Fraction(10, 3), Fraction(11, 3), 4]
    space, ident = builtin_system("punctured_circle", {"N": 6, "gap_index": 2})
    assert space.labels == ("0", "1", "3", "4", "5") and ident.image.tolist() == list(range(5))


def test_builtin_parameter_errors():
    with pytest.raises(SystemConfigError):
        builtin_system("nope")
    with pytest.raises(SystemConfigError):
        builtin_system("cat_map", {"M": 3})
    with pytest.raises(SystemConfigError):
        builtin_system("circle_doubling", {"N": 1})
    with pytest.raises(SystemConfigError):
        builtin_system("punctured_circle", {"N": 8, "gap_index": 8})


def test_config_round_trip():
    config = default_config("cat_map")
    assert config.eps_grid == [Fraction("0.1"), Fraction("0.2"), Fraction("0.3"), Fraction("0.35")]
    assert config.scales[0] == Fraction(7, 64) and len(config.scales) == 5
    data = json.loads(json.dumps(config.to_json()))
    again = ExperimentConfig.from_json(data)
    assert again == config
    custom = ExperimentConfig.from_json({"system": "circle_doubling", "scales": ["0.05", "0.04"], "tolerance": 0.2})
    assert custom.scales == [Fraction(1, 20), Fraction(1, 25)] and custom.tolerance == 0.2


def test_axiom_suite_is_deterministic():
    a, b = axiom_suite(7, 10), axiom_suite(7, 10)
    assert a.to_json() == b.to_json()
    assert a.ok and set(a.passed) == set(AXIOMS) and all(v == 10 for v in a.passed.values())
    with pytest.raises(ValueError):
        axiom_suite(0, 0)


def test_two_hexagons_add(hexagon):
    union = disjoint_union([hexagon, hexagon], 10)
    assert lc_betti_numbers(union, [1.5, 1.2, 1.05]) == (2, 2)


def test_hexagon_excision(hexagon):
    """Opposite vertices 0 and 3 are not adjacent, so cutting 0 out of the pair is allowed."""
    c = build_complex(hexagon, 1.2, 2)
    a = [0, 1, 2, 4, 5]
    b = [1, 2, 3, 4, 5]
    sub = build_complex(hexagon.subspace(b), 1.2, 2)
    ab = [b.index(i) for i in a if i in b]
    for n in range(2):
        assert relative_homology(sub, ab, n).rank == relative_homology(c, a, n).rank


def test_rotation_verdict_report():
    space, f = builtin_system("circle_rotation", {"N": 64, "step": 3})
    config = default_config("circle_rotation", {"N": 64, "step": 3})
    verdict = verify_entropy_bound(space, f, config)
    assert verdict.passed and verdict.log_rho == 0 and verdict.h_est == 0
    rep = json.loads(json.dumps(verdict.to_json()))
    assert rep["pass"] and rep["margin"] == 0
    assert rep["provenance"]["induced"]["matrix"] == [[{"numerator": 1, "denominator": 1}]]
    assert len(rep["provenance"]["fit_window"]) >= 3


def test_constant_map_verdict_has_no_log_rho():
    space, _ = builtin_system("circle_doubling", {"N": 64})
    from scaled_homology.maps import SampledSelfMap

    const = SampledSelfMap(space, [0] * 64)
    verdict = verify_entropy_bound(space, const, default_config("circle_doubling", {"N": 64}))
    assert verdict.log_rho == -math.inf and verdict.passed
    assert verdict.to_json()["log_rho"] is None
