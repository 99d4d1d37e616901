import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import reciprocal_sum
from conftest import HYPERBOLIC_TRIANGLES, make_graph, triangle
from deligne.hyp_trig import right_triangle_leg_angle, solve_angle_angle_side
from deligne.metric_synth import (
    HYPERBOLIC,
    MOUSSONG,
    ClassificationMismatch,
    NotHyperbolicType,
    build_params,
    cycle_sums,
    ell_feasible,
    fundamental_shape,
    synthesize_ell,
    synthesize_epsilon,
    theta,
)

PI = math.pi


def oracle_bounds(labels):
    """Recompute each closed-form bound from its defining inequality."""
    out = []
    for p, q, r in [(2, 3, 7), (2, 4, 5), (3, 3, 4)]:
        gap = 1 - reciprocal_sum((p, q, r))
        out.append(gap * PI / 24)
    out.append((PI / 12) / 13)
    out.append((PI / 4) / 16)
    out.append((PI - PI / 2 - PI / 4) / 3)  # (pi/2 + e) + (pi/4 + e) <= pi - e
    out.append(PI / 7)
    out.extend(2 * PI / m for m in labels)
    return out


def test_epsilon_on_graph_with_commuting_edge(example_graph):
    eps, cert = synthesize_epsilon(example_graph)
    assert abs(eps - min(oracle_bounds([2, 4])) / 2) < 1e-15
    assert abs(eps - PI / 2016) < 1e-12
    assert abs(eps - 0.0015585) < 1e-6


def test_epsilon_without_cycles_uses_global_bounds():
    eps, cert = synthesize_epsilon(make_graph("st", [("s", "t", 7)]))
    assert abs(eps - PI / 2016) < 1e-12
    assert cert.cycle_checks == ()
    assert len(cert.bounds) == 8


def test_example_graph_has_no_cycles(example_graph):
    eps, cert = synthesize_epsilon(example_graph)
    assert cert.cycle_checks == ()
    assert {b.name for b in cert.bounds} >= {"triangle(2,3,7)", "four-cycle", "long-cycle"}


def test_certificate_bounds_match_oracle(example_graph):
    _, cert = synthesize_epsilon(example_graph)
    assert sorted(b.limit for b in cert.bounds) == pytest.approx(sorted(oracle_bounds([2, 4])), abs=1e-15)


@pytest.mark.parametrize("tri", HYPERBOLIC_TRIANGLES)
def test_slacks_nonnegative_and_doubling_is_tight(tri):
    eps, cert = synthesize_epsilon(triangle(*tri))
    assert cert.binding.name == "triangle(2,3,7)"
    assert all(v > 0 for v in cert.slacks().values())
    assert cert.violated(2 * eps) == ["triangle(2,3,7)"]
    assert all(slack >= 0 for _, slack in cert.cycle_checks)


def test_non_hyperbolic_rejected():
    with pytest.raises(NotHyperbolicType):
        synthesize_epsilon(triangle(3, 3, 3))


def test_cycle_sums_match_direct_evaluation():
    g = make_graph("abcd", [("a", "b", 3), ("b", "c", 3), ("c", "d", 3), ("a", "d", 3), ("a", "c", 5)])
    eps = PI / 2016
    sums = dict(cycle_sums(g, eps))
    assert len(sums) == 3
    four = [c for c in sums if len(c) == 4][0]
    assert abs(sums[four] - (4 * ((2 * PI / 6) - 3 * eps) - PI - eps)) < 1e-12


def test_long_cycles_follow_from_quarter_bound():
    # every label contributes at least pi/4 - 3 eps, so cycles of length >= 5 pass analytically
    eps = PI / 2016
    assert 5 * (theta(2, eps) - eps) >= PI + eps


def test_ell_conditions_hold_for_example(example_graph):
    p = build_params(example_graph)
    for m in (2, 4):
        shape = solve_angle_angle_side(PI / 2 + p.epsilon, PI / (2 * m) + p.epsilon, p.ell)
        assert shape.area <= p.epsilon
        assert right_triangle_leg_angle(1.0, shape.sides[0]) >= PI / 2 - p.epsilon


def test_ell_has_three_significant_digits(example_graph):
    p = build_params(example_graph)
    mantissa = p.ell / 10 ** math.floor(math.log10(p.ell))
    assert abs(mantissa * 100 - round(mantissa * 100)) < 1e-9


def test_no_finite_labels_gives_unit_length():
    g = make_graph("st", [])
    assert synthesize_ell(g, PI / 2016) == 1.0


def test_feasibility_is_monotone():
    rnd = random.Random(7)
    eps = PI / 2016
    labels = [2, 3, 4, 7]
    ell = synthesize_ell(triangle(2, 3, 7), eps)
    for _ in range(100):
        x = ell * rnd.uniform(0.01, 1.0)
        assert ell_feasible(labels, x, eps)
        assert ell_feasible(labels, x / 2, eps)


def test_apex_angle_tends_to_theta():
    eps = PI / 2016
    for m in (2, 3, 5):
        assert abs(fundamental_shape(m, 1e-7, eps).angles[0] - theta(m, eps)) < 1e-9


@pytest.mark.parametrize("m", [2, 3, 4, 5, 8])
def test_edge_length_increases_with_ell(m):
    eps = PI / 2016
    ds = [fundamental_shape(m, x, eps).sides[0] for x in np.linspace(1e-4, 0.5, 40)]
    assert all(a < b for a, b in zip(ds, ds[1:]))


@pytest.mark.parametrize("tri", HYPERBOLIC_TRIANGLES)
def test_gauss_bonnet_identity(tri):
    p = build_params(triangle(*tri))
    for m, row in p.table.items():
        assert abs(row.apex_angle - (theta(m, p.epsilon) - row.shape.area)) <= 1e-9
        assert row.shape.area <= p.epsilon
        row.shape.check()
    assert p.invariant_violations() == []


def test_moussong_table():
    p = build_params(triangle(3, 3, 3), MOUSSONG)
    row = p.table[3]
    assert p.epsilon == 0.0 and p.ell == 1.0
    assert row.shape.angles == pytest.approx((PI / 3, PI / 2, PI / 6), abs=1e-15)
    assert row.theta == pytest.approx(PI / 3)
    for r in p.table.values():
        assert abs(sum(r.shape.angles) - PI) <= 1e-12
        r.shape.check()


def test_cone_triangle_data(example_graph):
    p = build_params(example_graph)
    for m, row in p.table.items():
        cone = row.cone_shape
        assert cone.angles[1] == PI / 2
        assert cone.sides[2] == 1.0
        assert cone.sides[0] == row.d
        assert cone.angles[2] == row.cone_angle


def test_mode_mismatch():
    with pytest.raises(ClassificationMismatch):
        build_params(triangle(3, 3, 3), HYPERBOLIC)
    with pytest.raises(ClassificationMismatch):
        build_params(triangle(2, 3, 3), MOUSSONG)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(HYPERBOLIC_TRIANGLES + [(7, 7, 7), (2, 3, 8), (3, 4, 4)]))
def test_params_invariants_hold(tri):
    p = build_params(triangle(*tri))
    for m in p.table:
        assert (PI / 2 + p.epsilon) + (PI / (2 * m) + p.epsilon) <= PI - p.epsilon
        assert p.table[m].cone_angle >= PI / 2 - p.epsilon
        assert p.table[m].shape.sides[2] == p.ell
