import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from _oracles import angle, dist, right_triangle_by_coordinates, triangle_by_shooting
from deligne.hyp_trig import (
    GluingError,
    angle_at,
    develop_chain,
    from_angles,
    hdist,
    on_hyperboloid,
    place_triangle,
    right_triangle,
    right_triangle_leg_angle,
    safe_acosh,
    side_of_line,
    solve_angle_angle_side,
    solve_side_angle_side,
    solve_sss,
)
from deligne.metric_synth import theta

EPS = math.pi / 2016


def test_small_side_limit_is_euclidean():
    beta, gamma = 1.1, 0.7
    shape = solve_angle_angle_side(beta, gamma, 1e-8)
    assert abs(shape.angles[0] - (math.pi - beta - gamma)) < 1e-6


def test_right_angle_case_matches_gauss_bonnet():
    shape = solve_angle_angle_side(math.pi / 2 + EPS, math.pi / 4 + EPS, 0.01)
    assert abs(shape.angles[0] - (theta(2, EPS) - shape.area)) < 1e-12


def test_apex_angle_matches_coordinate_construction():
    shape = solve_angle_angle_side(math.pi / 4, math.pi / 4, 1.0)
    assert abs(shape.angles[0] - triangle_by_shooting(math.pi / 4, math.pi / 4, 1.0)) < 1e-9


def test_placed_triangle_reproduces_shape():
    shape = solve_angle_angle_side(math.pi / 4, math.pi / 4, 1.0)
    P, Q, R = place_triangle(shape)
    assert abs(dist(Q, R) - shape.sides[0]) < 1e-9
    assert abs(dist(P, R) - shape.sides[1]) < 1e-9
    assert abs(dist(P, Q) - shape.sides[2]) < 1e-9
    assert abs(angle(P, Q, R) - shape.angles[0]) < 1e-9
    assert abs(angle(Q, P, R) - shape.angles[1]) < 1e-9
    assert abs(angle(R, P, Q) - shape.angles[2]) < 1e-9


def test_degenerate_leg_gives_right_angle():
    assert abs(right_triangle_leg_angle(1.0, 1e-10) - math.pi / 2) < 1e-9


def test_leg_angle_matches_coordinates():
    assert abs(right_triangle_leg_angle(1.0, 1.0) - right_triangle_by_coordinates(1.0, 1.0)) < 1e-12


@pytest.mark.parametrize("a, d", [(0, 1), (1, 0), (-1, 1)])
def test_leg_angle_domain(a, d):
    with pytest.raises(ValueError):
        right_triangle_leg_angle(a, d)


def test_right_triangle_shape_is_consistent():
    shape = right_triangle(1.0, 0.3)
    shape.check()
    assert shape.angles[1] == math.pi / 2
    assert shape.sides[2] == 1.0 and shape.sides[0] == 0.3


def test_acosh_clamp():
    assert safe_acosh(1 - 1e-13) == 0.0
    with pytest.raises(ValueError):
        safe_acosh(0.5)


def test_inadmissible_angles_rejected():
    with pytest.raises(ValueError):
        solve_angle_angle_side(2.0, 1.5, 1.0)


def test_single_triangle_development():
    shape = solve_sss(0.7, 0.9, 1.1)
    (pts,) = develop_chain([shape], [])
    for k in range(3):
        assert abs(hdist(pts[(k + 1) % 3], pts[(k + 2) % 3]) - shape.sides[k]) < 1e-12
        assert on_hyperboloid(pts[k])


def test_two_equilateral_triangles_are_mirror_images():
    shape = solve_sss(1.0, 1.0, 1.0)
    first, second = develop_chain([shape, shape], [(0, 0)])
    # shared edge is vertices 1,2 of the first; apexes lie on opposite sides at equal distance
    P, Q = first[1], first[2]
    assert side_of_line(P, Q, first[0]) * side_of_line(P, Q, second[0]) < 0
    assert abs(hdist(first[0], P) - hdist(second[0], P)) < 1e-12
    assert abs(hdist(first[0], Q) - hdist(second[0], Q)) < 1e-12
    assert {tuple(np.round(x, 12)) for x in second} >= {tuple(np.round(P, 12)), tuple(np.round(Q, 12))}


def test_chain_of_five_preserves_every_side():
    shapes = [solve_sss(1.0, 1.0, 1.0), solve_sss(1.0, 0.8, 0.9), solve_sss(0.9, 0.7, 1.2),
              solve_sss(1.2, 1.0, 0.6), solve_sss(0.6, 0.6, 0.6)]
    gluing = [(0, 0), (2, 0), (2, 0), (2, 1)]
    placed = develop_chain(shapes, gluing)
    for shape, pts in zip(shapes, placed):
        for k in range(3):
            assert abs(dist(pts[(k + 1) % 3], pts[(k + 2) % 3]) - shape.sides[k]) < 1e-8
    for k, (ep, en) in enumerate(gluing):
        prev, nxt = placed[k], placed[k + 1]
        # default identification: vertex ep+1 meets en+2
        assert np.allclose(prev[(ep + 1) % 3], nxt[(en + 2) % 3])
        assert np.allclose(prev[(ep + 2) % 3], nxt[(en + 1) % 3])
        a, b = prev[(ep + 1) % 3], prev[(ep + 2) % 3]
        assert side_of_line(a, b, prev[ep]) * side_of_line(a, b, nxt[en]) < 0


def test_length_mismatch_rejected():
    with pytest.raises(GluingError):
        develop_chain([solve_sss(1.0, 1.0, 1.0), solve_sss(0.5, 1.0, 1.0)], [(1, 0)])


def test_development_invariant_under_base_isometry():
    shapes = [solve_sss(1.0, 1.0, 1.0)] * 3
    gluing = [(0, 1), (2, 0)]
    r = 0.8
    boost = np.array([[math.cosh(r), 0, math.sinh(r)], [0, 1, 0], [math.sinh(r), 0, math.cosh(r)]])
    c, s = math.cos(0.4), math.sin(0.4)
    rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    a = [p for tri in develop_chain(shapes, gluing) for p in tri]
    b = [p for tri in develop_chain(shapes, gluing, base=boost @ rot) for p in tri]
    for i in range(len(a)):
        for j in range(len(a)):
            assert abs(hdist(a[i], a[j]) - hdist(b[i], b[j])) < 1e-9


# --- properties ---------------------------------------------------------------

angle_pairs = st.tuples(st.floats(0.05, 2.9), st.floats(0.05, 2.9)).filter(lambda p: p[0] + p[1] < math.pi - 0.05)


@settings(max_examples=300, deadline=None)
@given(angle_pairs, st.floats(1e-3, 3.0))
def test_solver_output_satisfies_identities(pair, c):
    beta, gamma = pair
    shape = solve_angle_angle_side(beta, gamma, c)
    assert max(shape.law_of_cosines_residuals()) < 1e-9
    assert abs(shape.area - (math.pi - sum(shape.angles))) < 1e-12
    assert sum(shape.angles) < math.pi


@settings(max_examples=300, deadline=None)
@given(angle_pairs, st.floats(1e-2, 2.0))
def test_resolving_from_other_corners_reproduces_shape(pair, c):
    beta, gamma = pair
    shape = solve_angle_angle_side(beta, gamma, c)
    assume(shape.angles[0] > 1e-3)
    # rotate the roles so the old vertex 0 plays v'' and old side 0 is the given side
    rotated = solve_angle_angle_side(shape.angles[2], shape.angles[0], shape.sides[0])
    assert np.allclose(rotated.angles, (shape.angles[1], shape.angles[2], shape.angles[0]), atol=1e-8)
    assert np.allclose(rotated.sides, (shape.sides[1], shape.sides[2], shape.sides[0]), rtol=1e-8, atol=1e-8)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 2.0), st.floats(0.1, 2.0), st.floats(0.1, 2.0))
def test_sss_matches_angles(a, b, c):
    assume(a < b + c - 1e-3 and b < a + c - 1e-3 and c < a + b - 1e-3)
    shape = solve_sss(a, b, c)
    assert max(shape.law_of_cosines_residuals()) < 1e-9
    back = from_angles(shape.angles)
    assert np.allclose(back.sides, shape.sides, rtol=1e-6)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 2.0), st.floats(0.2, 2.8), st.floats(0.1, 2.0))
def test_sas_round_trip(b, gamma, a):
    shape = solve_side_angle_side(b, gamma, a)
    assert max(shape.law_of_cosines_residuals()) < 1e-9
    P, Q, R = place_triangle(shape)
    assert abs(angle_at(R, P, Q) - gamma) < 1e-8
