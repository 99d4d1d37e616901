import json
import math
from itertools import product

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _chain_oracle import brute_force_distance, vertex_table
from deligne.geodesic import (
    TEST_COMPLEXES,
    Cover,
    NotAcuteError,
    NotCertifiedError,
    OutsideComplexError,
    Point,
    acyl_constants,
    angle_check,
    book,
    cover_check,
    cover_constants,
    decompose,
    equilateral,
    extended_gallery,
    fellow_travel_length,
    from_triangles,
    gallery_constant,
    geodesic,
    heptagonal_ball,
    is_local_geodesic,
    link_distance,
    loads,
    random_point,
    run_stability_trials,
    shoot,
    stability_test,
    star_bound,
    two_flowers,
    uniform,
)
from deligne.geodesic.cover import analytic_margins, projection, sample_memberships
from deligne.geodesic.galleries import two_shortest_paths
from deligne.geodesic.paths import LinkPoint, local_geodesic_certificate
from deligne.hyp_trig import GluingError, from_angles, hdist, right_triangle
from deligne.metric_synth import build_params


@pytest.fixture(scope="module")
def covers():
    out = {}
    for name, build in TEST_COMPLEXES.items():
        Y = build()
        out[name] = (Y, Cover(Y, cover_constants(Y)))
    return out


def corner_point(Y, t, v):
    return Point.at(t, [1.0 if u == v else 0.0 for u in Y.triangles[t]])


def link_cycle(Y, v):
    """Corners around an interior vertex in cyclic order: (triangle, from-vertex, angle)."""
    G = nx.MultiGraph()
    for t in Y.vertex_triangles[v]:
        a, b = Y.corner(t, v)
        G.add_edge(a, b, t=t)
    cycle = nx.find_cycle(G)
    return [(G[a][b][k]["t"], a, Y.angle(G[a][b][k]["t"], v)) for a, b, k in cycle]


def hub(Y):
    return next(u for u in Y.vertices if len(Y.vertex_triangles[u]) == 7)


def point_in_direction(Y, v, phi, r):
    """The point at distance r from v whose direction sits at arc position phi on the link cycle."""
    for t, start, ang in link_cycle(Y, v):
        if phi <= ang:
            off = phi if Y.corner(t, v)[0] == start else ang - phi
            return shoot(Y, corner_point(Y, t, v), off, r)[0], LinkPoint(v, t, off)
        phi -= ang
    raise ValueError("phi beyond the link")


# --- complexes ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(TEST_COMPLEXES))
def test_test_complexes_are_certified_and_acute(name):
    Y = TEST_COMPLEXES[name]()
    Y.certify()
    assert Y.is_acute()[0]
    assert len(Y.triangles) <= 40


def test_json_round_trip_is_exact():
    Y = two_flowers()
    Z = loads(Y.to_json())
    assert Z.triangles == Y.triangles
    assert Z.to_json() == Y.to_json()


def test_vertices_are_recovered_from_gluings_alone():
    Y = book()
    doc = json.loads(Y.to_json())
    for t in doc["triangles"]:
        del t["vertices"]
    Z = loads(json.dumps(doc))
    assert sorted(len(ts) for ts in Z.edge_triangles.values()) == sorted(len(ts) for ts in Y.edge_triangles.values())
    assert len(Z.vertices) == len(Y.vertices)


def test_gluing_edges_of_different_length_is_rejected():
    doc = {"triangles": [{"sides": [1.0, 1.0, 1.0]}, {"sides": [1.2, 1.0, 1.0]}],
           "gluings": [{"edge": [[0, 0], [1, 0]], "flip": False}]}
    with pytest.raises(GluingError):
        loads(json.dumps(doc))


def test_rescale_by_one_is_identity():
    Y = heptagonal_ball()
    assert Y.rescale(1).to_json() == Y.to_json()


@pytest.mark.parametrize("name", sorted(TEST_COMPLEXES))
def test_rescale_by_two_opens_every_angle(name):
    Y = TEST_COMPLEXES[name]()
    Z = Y.rescale(2)
    for old, new in zip(Y.shapes, Z.shapes):
        assert all(b > a for a, b in zip(old.angles, new.angles))
        assert sum(new.angles) < math.pi
    assert all(Z.link_girths[v] >= Y.link_girths[v] for v in Y.vertices)


def test_acuteness_of_small_equilateral():
    assert from_triangles([(0, 1, 2)], [equilateral(1.0)]).is_acute() == (True, None)


def test_right_angled_cone_triangle_is_not_acute():
    ok, (t, v, a) = from_triangles([(0, 1, 2)], [right_triangle(1.0, 0.5)]).is_acute()
    assert not ok and a == pytest.approx(math.pi / 2)


def test_fundamental_triangle_is_not_acute(example_graph):
    p = build_params(example_graph)
    Y = from_triangles([(0, 1, 2)], [p.table[4].shape])
    ok, (_, _, a) = Y.is_acute()
    assert not ok
    assert a == pytest.approx(math.pi / 2 + p.epsilon, abs=1e-9)


def test_points_outside_the_complex_are_rejected():
    Y = book()
    with pytest.raises(OutsideComplexError):
        geodesic(Y, Point(99, (1.0, 0.0, 0.0)), Point(0, (1.0, 0.0, 0.0)))


# --- geodesics ---------------------------------------------------------------------------

def test_geodesic_inside_one_triangle_is_the_straight_segment():
    Y = book()
    x, y = Point.at(3, [0.6, 0.3, 0.1]), Point.at(3, [0.1, 0.2, 0.7])
    assert geodesic(Y, x, y).length == pytest.approx(hdist(Y.position(x), Y.position(y)), abs=1e-12)


@pytest.fixture(scope="module")
def vertex_tables():
    return {name: vertex_table(TEST_COMPLEXES[name]()) for name in ("book", "two-flowers")}


@pytest.mark.parametrize("name", ["book", "two-flowers"])
def test_geodesic_lengths_match_chain_enumeration(name, vertex_tables):
    Y = TEST_COMPLEXES[name]()
    rng = np.random.default_rng(11)
    for k in range(12):
        x = random_point(Y, rng) if k % 3 else Y.vertex_point(int(rng.choice(Y.vertices)))
        y = random_point(Y, rng)
        g = geodesic(Y, x, y)
        assert g.length == pytest.approx(brute_force_distance(Y, x, y, vertex_tables[name]), abs=1e-9)


def test_geodesic_through_vertex_when_link_directions_are_far():
    Y = heptagonal_ball()
    v = hub(Y)
    r = 0.3
    x, px = point_in_direction(Y, v, 0.2, r)
    for phi in (math.pi, math.pi + 0.05, Y.link_girth(v) - math.pi - 1e-9):
        y, py = point_in_direction(Y, v, 0.2 + phi, r)
        assert link_distance(Y, px, py) == pytest.approx(min(phi, Y.link_girth(v) - phi))
        g = geodesic(Y, x, y)
        assert g.length == pytest.approx(2 * r, abs=1e-9)
        assert Y.support(g.point_at(r)) == {v}


def test_geodesic_cuts_the_corner_when_link_directions_are_close():
    Y = heptagonal_ball()
    v = hub(Y)
    r, phi = 0.3, math.pi - 0.3
    x, _ = point_in_direction(Y, v, 0.2, r)
    y, _ = point_in_direction(Y, v, 0.2 + phi, r)
    # hyperbolic law of cosines in the developed star
    expected = math.acosh(math.cosh(r) ** 2 - math.sinh(r) ** 2 * math.cos(phi))
    assert geodesic(Y, x, y).length == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("name", sorted(TEST_COMPLEXES))
def test_geodesics_are_locally_geodesic(name):
    Y = TEST_COMPLEXES[name]()
    rng = np.random.default_rng(5)
    for _ in range(15):
        g = geodesic(Y, random_point(Y, rng), random_point(Y, rng))
        assert is_local_geodesic(g)
        assert all(a >= math.pi - 1e-9 for _, a in local_geodesic_certificate(g))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_distance_is_a_metric(seed):
    Y = two_flowers()
    rng = np.random.default_rng(seed)
    x, y, z = (random_point(Y, rng) for _ in range(3))
    dxy, dyx = geodesic(Y, x, y).length, geodesic(Y, y, x).length
    assert dxy == pytest.approx(dyx, abs=1e-12)
    assert geodesic(Y, x, z).length <= dxy + geodesic(Y, y, z).length + 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.95))
def test_points_along_a_geodesic_split_its_length(seed, frac):
    Y = book()
    rng = np.random.default_rng(seed)
    g = geodesic(Y, random_point(Y, rng), random_point(Y, rng))
    m = g.point_at(frac * g.length)
    assert geodesic(Y, g.x, m).length == pytest.approx(frac * g.length, abs=1e-9)
    assert geodesic(Y, m, g.y).length == pytest.approx((1 - frac) * g.length, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_distance_between_midpoints_is_convex(seed):
    Y = book()
    rng = np.random.default_rng(seed)
    x, y = random_point(Y, rng), random_point(Y, rng)
    x2 = shoot(Y, x, rng.random() * 2 * math.pi, 0.3 * rng.random(), rng)[0]
    y2 = shoot(Y, y, rng.random() * 2 * math.pi, 0.3 * rng.random(), rng)[0]
    g, h = geodesic(Y, x, y), geodesic(Y, x2, y2)
    gap = geodesic(Y, g.point_at(g.length / 2), h.point_at(h.length / 2)).length
    assert gap <= max(geodesic(Y, x, x2).length, geodesic(Y, y, y2).length) + 1e-9


# --- galleries ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(TEST_COMPLEXES))
def test_extended_gallery_contains_gallery(name):
    Y = TEST_COMPLEXES[name]()
    alpha = cover_constants(Y).alpha
    rng = np.random.default_rng(2)
    for _ in range(20):
        g = geodesic(Y, random_point(Y, rng), random_point(Y, rng))
        gal = extended_gallery(Y, g, alpha)
        assert gal.simplices <= gal.extended
        assert gal.simplices == g.gallery()
        if not g.bend_vertices():
            assert gal.extended == gal.simplices


def test_short_link_path_extends_the_gallery():
    Y = heptagonal_ball()
    alpha = cover_constants(Y).alpha
    v = hub(Y)
    x, px = point_in_direction(Y, v, 0.2, 0.3)
    y, py = point_in_direction(Y, v, 0.2 + math.pi + alpha, 0.3)
    g = geodesic(Y, x, y)
    gal = extended_gallery(Y, g, alpha)
    (ext,) = gal.extensions
    assert ext.link_length == pytest.approx(math.pi + alpha)
    assert ext.second_length == pytest.approx(Y.link_girth(v) - math.pi - alpha)
    assert ext.second_length >= math.pi + 2 * alpha
    assert gal.extended > gal.simplices
    # the extension is the corners swept by the short side of the link
    swept = {Y.simplex_of(t) for t in ext.triangles}
    assert swept <= gal.extended and len(ext.triangles) >= 3


def test_second_shortest_link_path_on_a_cycle():
    Y = heptagonal_ball()
    v = hub(Y)
    _, p = point_in_direction(Y, v, 0.1, 0.2)
    _, q = point_in_direction(Y, v, 2.0, 0.2)
    first, _, second = two_shortest_paths(Y, p, q)
    assert first == pytest.approx(1.9)
    assert second == pytest.approx(Y.link_girth(v) - 1.9)


# --- cover --------------------------------------------------------------------------------

def test_alpha_of_a_single_triangle():
    Y = from_triangles([(0, 1, 2)], [from_angles((math.pi / 3, math.pi / 3, math.pi / 4))])
    k = cover_constants(Y)
    assert k.alpha <= math.pi / 48
    assert k.alpha == pytest.approx(math.pi / 4 / 12 / 2)


def test_cover_constants_need_a_certified_complex():
    hexagon = [(0, i, i % 6 + 1) for i in range(1, 7)]
    with pytest.raises(NotCertifiedError):
        cover_constants(uniform(hexagon))


@pytest.mark.parametrize("name", sorted(TEST_COMPLEXES))
def test_cover_constant_inequalities_have_slack(name, covers):
    Y, cover = covers[name]
    k = cover.k
    assert 0 < k.epsilon <= k.epsilon0
    assert k.min_angle >= 12 * k.alpha
    assert all(v >= 0 for v in analytic_margins(Y, k).values())


@pytest.mark.parametrize("name", sorted(TEST_COMPLEXES))
def test_cover_sets_nest_and_stay_in_stars(name, covers):
    Y, cover = covers[name]
    res = cover_check(Y, cover, 1500, seed=4)
    assert res.ok, res.examples


def test_angle_bound_holds_away_from_shared_edges(covers):
    Y, cover = covers["two-flowers"]
    res = angle_check(Y, cover, 1500, seed=1)
    for kind, stats in res.by_kind.items():
        if kind != "triangle/triangle, common edge":
            assert stats.violations == 0 and stats.smallest >= res.bound


def test_adjacent_triangle_sets_meet_at_a_small_angle(covers):
    # points on both sides of an edge, just outside its cover set, lie in the sets of both triangles
    Y, cover = covers["heptagonal-ball"]
    v = 0
    t1 = Y.vertex_triangles[v][0]
    a, _ = Y.corner(t1, v)
    (t2,) = [t for t in Y.edge_triangles[frozenset((v, a))] if t != t1]
    half, h = Y.edge_length(frozenset((v, a))) / 2, 1.01 * cover.r_edge
    theta = math.atan(math.tanh(h) / math.sinh(half))
    r = math.acosh(math.cosh(half) * math.cosh(h))
    pts = []
    for t in (t1, t2):
        off = theta if Y.corner(t, v)[0] == a else Y.angle(t, v) - theta
        p = shoot(Y, corner_point(Y, t, v), off, r)[0]
        frame, x = Y.frames[p.triangle], Y.position(p)
        assert min(hdist(x, frame[v]), hdist(x, frame[a])) > cover.r_vertex
        assert cover.members(p) == [Y.simplex_of(t)]
        pts.append(p)
    angle = link_distance(Y, projection(Y, v, pts[0]), projection(Y, v, pts[1]))
    assert angle == pytest.approx(2 * theta)
    assert angle < 4 * cover.k.alpha


# --- decompositions ----------------------------------------------------------------------

def _valid(seq, s, where):
    """Points of the sets of seq in order along the samples, starting at x and ending at y."""
    if any(not (a & b) for a, b in zip(seq, seq[1:])):
        return False
    if any(tau not in where for tau in seq) or where[seq[0]][0] != 0 or where[seq[-1]][-1] != len(s) - 1:
        return False
    i = 0
    for tau in seq[1:-1]:
        later = where[tau][where[tau] >= i]
        if not len(later):
            return False
        i = int(later[0])
    return where[seq[-1]][-1] >= i


def test_decomposition_in_one_cover_set_is_trivial(covers):
    Y, cover = covers["book"]
    x, y = Point.at(2, [0.34, 0.33, 0.33]), Point.at(2, [0.3, 0.36, 0.34])
    assert cover.members(x) == cover.members(y) == [Y.simplex_of(2)]
    D = decompose(cover, geodesic(Y, x, y))
    assert D.k == 0 and D.simplices == (Y.simplex_of(2),) * 2


@pytest.mark.parametrize("seed", range(6))
def test_decomposition_is_minimal_by_exhaustion(covers, seed):
    Y, cover = covers["book"]
    rng = np.random.default_rng(seed)
    inner = [e for e in Y.edges if len(Y.edge_triangles[e]) > 1]
    t1, t2 = rng.choice(Y.edge_triangles[inner[int(rng.integers(len(inner)))]], 2, replace=False)
    x = Point.at(int(t1), [1 / 3] * 3)
    y = Point.at(int(t2), [1 / 3] * 3)
    g = geodesic(Y, x, y)
    D = decompose(cover, g)
    s, where = sample_memberships(cover, g, cover.k.epsilon / 4)
    n = len(D.simplices)
    assert _valid(D.simplices, s, where)
    for m in range(2, n):
        for seq in product(where, repeat=m):
            assert not _valid(seq, s, where)


@pytest.mark.parametrize("name", sorted(TEST_COMPLEXES))
def test_inner_decomposition_is_anchored(name, covers):
    Y, cover = covers[name]
    rng = np.random.default_rng(8)
    seen = 0
    for _ in range(10):
        g = geodesic(Y, random_point(Y, rng), random_point(Y, rng))
        D = decompose(cover, g)
        inner = D.inner()
        if inner is None:
            continue
        seen += 1
        h = g.subsegment(*inner)
        kept = D.simplices[1:-1]
        assert all(not (a <= b or b <= a) for a, b in zip(kept, kept[1:]))
        # dropping the end sets leaves a shortest decomposition of the inner segment
        s, where = sample_memberships(cover, h, cover.k.epsilon / 4)
        assert _valid(kept, s, where)
        assert len(decompose(cover, h).simplices) == len(kept)
    assert seen


# --- stability ---------------------------------------------------------------------------

def test_identity_perturbation_is_stable(covers):
    Y, cover = covers["heptagonal-ball"]
    rng = np.random.default_rng(0)
    g = geodesic(Y, random_point(Y, rng), random_point(Y, rng))
    assert stability_test(Y, g, g, cover.k.alpha).passed


def test_stability_is_refused_on_non_acute_complexes():
    Y = from_triangles([(0, 1, 2)], [right_triangle(1.0, 0.5)])
    g = geodesic(Y, Point.at(0, [0.5, 0.3, 0.2]), Point.at(0, [0.2, 0.3, 0.5]))
    with pytest.raises(NotAcuteError):
        stability_test(Y, g, g, 0.01)


@pytest.mark.parametrize("name", sorted(TEST_COMPLEXES))
def test_stability_trials_have_no_failures(name, covers):
    Y, cover = covers[name]
    rep = run_stability_trials(Y, cover, 20, seed=3)
    assert rep.failed == 0
    assert rep.passed + rep.skipped == 20 and rep.passed > 0


def test_stability_trials_are_reproducible(covers):
    Y, cover = covers["book"]
    a = run_stability_trials(Y, cover, 6, seed=9).to_dict()
    b = run_stability_trials(Y, cover, 6, seed=9).to_dict()
    assert a == b


def test_large_perturbation_control_runs(covers):
    Y, cover = covers["book"]
    rep = run_stability_trials(Y, cover, 6, seed=2, perturbation=10.0)
    assert rep.passed + rep.failed + rep.skipped == 6


# --- fellow travelling and constants -----------------------------------------------------

def test_fellow_travel_length_matches_the_symmetric_estimate():
    # two endpoint moves of size r shift the midpoint of a short geodesic by r / cosh(l)
    eps = 0.01
    ft = fellow_travel_length(2 * eps, eps)
    assert ft.length == pytest.approx(math.acosh(2.0), abs=1e-3)


def test_fellow_travel_length_grows_with_r_and_shrinks_with_eps():
    a = fellow_travel_length(0.02, 0.01).length
    b = fellow_travel_length(0.2, 0.01).length
    c = fellow_travel_length(0.2, 0.05).length
    assert a < b and c < b


def test_fellow_travel_needs_r_at_least_eps():
    with pytest.raises(ValueError):
        fellow_travel_length(0.01, 0.02)


def test_acyl_constants_worked_example():
    eps = 0.001
    c = acyl_constants(eps, 1, 1, 1, 1, 2)
    assert c.L == 7
    assert c.C_prime == pytest.approx((1 + 4 + 2 * eps) * 2)
    assert c.N == math.factorial(math.ceil(c.C_prime))


def test_acyl_constants_degenerate_case():
    assert acyl_constants(0, 0, 1, 0.5, 1.5, 3).C_prime == pytest.approx(4 * 1.5 * 3)


@settings(max_examples=50)
@given(st.floats(0, 5), st.floats(0, 5), st.floats(0, 5), st.floats(0.1, 3), st.floats(0.1, 3),
       st.sampled_from(["L0", "l_ft", "B"]), st.floats(0.01, 2))
def test_acyl_L_is_increasing(r, L0, l_ft, B, C, which, bump):
    args = {"r": r, "L0": L0, "N0": 1, "l_ft": l_ft, "B": B, "C": C}
    before = acyl_constants(**args).L
    args[which] += bump
    assert acyl_constants(**args).L > before


def test_acyl_constants_overflow_marker():
    c = acyl_constants(1.0, 200, 5, 1, 2, 3)
    assert c.overflow and c.N is None and c.log10_N > 300
    assert c.to_dict()["N"] == "overflow"


@pytest.mark.parametrize("bad", [{"N0": 0}, {"B": 0}, {"C": -1}, {"r": -0.1}, {"L0": -1}])
def test_acyl_constants_reject_bad_inputs(bad):
    args = {"r": 0.1, "L0": 1, "N0": 1, "l_ft": 1, "B": 1, "C": 1, **bad}
    with pytest.raises(ValueError):
        acyl_constants(**args)


def test_star_bound_and_gallery_constant():
    Y = book()
    B = star_bound(Y)
    assert max(Y.edge_length(e) for e in Y.edges) <= B < 2 * max(Y.edge_length(e) for e in Y.edges) + 1e-9
    alpha = cover_constants(Y).alpha
    C = gallery_constant(Y, alpha, samples=40)
    assert C == gallery_constant(Y, alpha, samples=40)
    assert 3 <= C < math.inf
