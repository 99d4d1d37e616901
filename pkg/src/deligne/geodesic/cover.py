"""The open cover {U_tau} of a certified complex and decompositions of geodesics.

U_v is the open 6*eps0 ball about a vertex, U_e the open 4*eps neighbourhood
of the edge minus the two vertex balls (its "core"), and U_sigma the open
eps neighbourhood of the part of a triangle left after removing the vertex
and edge sets of its faces.  Since every U_tau lies in the open star of tau,
membership of a point is decided inside one carrier triangle.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..hyp_trig import angle_at, exp_map, hdist, minkowski_dot, side_of_line, tangent_at, third_point, _line_normal
from .complex import PHComplex, Point, Simplex
from .galleries import LinkPoint, link_distance
from .paths import Geodesic, random_point, shoot

SAFETY = 2.0
EPS0_SHRINK = 0.999
SHELL_TOL = 1e-12
SUPPORT_TOL = 1e-10


class CoverError(RuntimeError):
    pass


@dataclass(frozen=True)
class CoverConstants:
    alpha: float
    epsilon0: float
    epsilon: float
    min_angle: float
    min_girth: float
    min_altitude: float
    min_vertex_distance: float
    lipschitz_sampled: float
    epsilon_candidates: Dict[str, float] = field(default_factory=dict)
    notes: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["notes"] = list(self.notes)
        return d


def altitude(Y: PHComplex, t: int, v: int) -> float:
    """Distance from ``v`` to the opposite side of triangle ``t``."""
    a, b = Y.corner(t, v)
    # sinh h = sinh(d(v, a)) * sin(angle at a)
    return math.asinh(math.sinh(Y.distance_in(t, v, a)) * math.sin(Y.angle(t, a)))


def min_vertex_distance(Y: PHComplex) -> float:
    # a shortest path between distinct vertices starts with a straight leg no longer than itself
    return min(leg.length for legs in Y.vertex_legs.values() for leg in legs.values())


def projection(Y: PHComplex, v: int, p: Point) -> Optional[LinkPoint]:
    """Direction at ``v`` toward ``p``, for ``p`` in the open star of ``v``."""
    for c in Y.carriers(p):
        if v in Y.triangles[c.triangle]:
            t = c.triangle
            frame = Y.frames[t]
            a, _ = Y.corner(t, v)
            x = Y.position(c)
            if hdist(frame[v], x) == 0:
                return None
            return LinkPoint(v, t, min(max(angle_at(frame[v], frame[a], x), 0.0), Y.angle(t, v)))
    return None


def sampled_lipschitz(Y: PHComplex, eps0: float, samples: int, rng: np.random.Generator) -> float:
    """Largest observed ratio (link distance of projections) / (distance) near the eps0 sphere."""
    worst = 0.0
    for _ in range(samples):
        v = int(rng.choice(Y.vertices))
        t = int(rng.choice(Y.vertex_triangles[v]))
        r = eps0 * (1.0 + rng.random())
        corner = Point.at(t, [1.0 if u == v else 0.0 for u in Y.triangles[t]])
        p, _ = shoot(Y, corner, rng.random() * Y.angle(t, v), r, rng)
        delta = eps0 * 0.05 * rng.random() + 1e-9
        q, d = shoot(Y, p, rng.random() * 2 * math.pi, delta, rng)
        a, b = projection(Y, v, p), projection(Y, v, q)
        if a is None or b is None or d <= 0:
            continue
        worst = max(worst, link_distance(Y, a, b) / d)
    return worst


def cover_constants(Y: PHComplex, samples: int = 2000, seed: int = 0) -> CoverConstants:
    """alpha, eps0 and eps for a certified complex (raises NotCertifiedError otherwise)."""
    Y.certify()
    min_angle = Y.min_angle()
    girths = [g for g in Y.link_girths.values() if math.isfinite(g)]
    min_girth = min(girths) if girths else math.inf
    alpha = min(min_angle / 12, (min_girth - 2 * math.pi) / 4) / SAFETY
    h = min(altitude(Y, t, v) for t, tri in enumerate(Y.triangles) for v in tri)
    dv = min_vertex_distance(Y)
    eps0 = EPS0_SHRINK * min(h / 10, dv / 12)
    rng = np.random.default_rng(seed)
    lip = sampled_lipschitz(Y, eps0, samples, rng)
    cands = {
        "epsilon0": eps0,
        "sampled_lipschitz": alpha / (SAFETY * lip) if lip > 0 else math.inf,
        # a segment of length eps seen from distance >= eps0 subtends at most asin(sinh eps / sinh eps0)
        "closed_form_angle": math.asinh(math.sin(alpha) * math.sinh(eps0)),
    }
    eps = min(cands.values())
    notes = (
        "epsilon0 is the closed-form maximum scaled by %.3f" % EPS0_SHRINK,
        "the Lipschitz constant is sampled; epsilon also respects the closed-form angle bound",
    )
    return CoverConstants(alpha, eps0, eps, min_angle, min_girth, h, dv, lip, cands, notes)


def analytic_margins(Y: PHComplex, k: CoverConstants) -> Dict[str, float]:
    """Slack (>= 0 required) in the inequalities the cover construction relies on."""
    e0, e = k.epsilon0, k.epsilon
    return {
        "ball_plus_4eps0_inside_star": k.min_altitude - 10 * e0,
        "vertex_balls_disjoint": k.min_vertex_distance - 12 * e0,
        "edge_set_misses_other_edges": math.asinh(math.sinh(6 * e0 - 4 * e) * math.sin(k.min_angle)) - 5 * e,
        "eps_at_most_eps0": e0 - e,
        "angle_bound_at_eps0": k.alpha - math.asin(min(1.0, math.sinh(e) / math.sinh(e0))),
        "min_angle_vs_alpha": k.min_angle - 12 * k.alpha,
        "girth_vs_alpha": (k.min_girth - 2 * math.pi - 4 * k.alpha) if math.isfinite(k.min_girth) else math.inf,
    }


# --- membership ----------------------------------------------------------------------------

@dataclass
class _TriangleData:
    verts: Tuple[int, int, int]
    V: np.ndarray  # 3x3, columns are the vertices in the standard frame
    Vinv: np.ndarray
    edges: List[dict]
    corners: List[np.ndarray]


class Cover:
    def __init__(self, Y: PHComplex, constants: CoverConstants):
        self.Y = Y
        self.k = constants
        self.r_vertex = 6 * constants.epsilon0
        self.r_edge = 4 * constants.epsilon
        self.r_tri = constants.epsilon

    @cached_property
    def data(self) -> List[_TriangleData]:
        out = []
        for t, tri in enumerate(self.Y.triangles):
            frame = self.Y.frames[t]
            V = np.column_stack([frame[v] for v in tri])
            edges = []
            corners = []
            for i in range(3):
                a, b, c = tri[(i + 1) % 3], tri[(i + 2) % 3], tri[i]
                A, B, C = frame[a], frame[b], frame[c]
                n = _line_normal(A, B)
                if minkowski_dot(n, C) < 0:
                    n = -n
                ca = exp_map(A, tangent_at(A, B), self.r_vertex)
                cb = exp_map(B, tangent_at(B, A), self.r_vertex)
                edges.append({
                    "simplex": frozenset((a, b)), "local": ((i + 1) % 3, (i + 2) % 3), "n": n,
                    "ends": (ca, cb), "u": (tangent_at(ca, cb), tangent_at(cb, ca)),
                })
                sign = 1.0 if side_of_line(A, B, C) > 0 else -1.0
                for P, cap in ((A, ca), (B, cb)):
                    try:
                        corners.append(third_point(P, cap, self.r_vertex, self.r_edge, sign))
                    except (ValueError, ZeroDivisionError):
                        pass
            out.append(_TriangleData(tri, V, np.linalg.inv(V), edges, corners))
        return out

    # distances, vectorized over the columns of X (points in the standard frame of t)

    @staticmethod
    def _mdot(X, y):
        return X[0] * y[0] + X[1] * y[1] - X[2] * y[2]

    def _vertex_dist(self, d: _TriangleData, X) -> np.ndarray:
        return np.arccosh(np.maximum(-np.stack([self._mdot(X, d.V[:, i]) for i in range(3)]), 1.0))

    def _edge_dist(self, d: _TriangleData, X) -> np.ndarray:
        out = []
        for e in d.edges:
            line = np.arcsinh(np.abs(self._mdot(X, e["n"])))
            inside = (self._mdot(X, e["u"][0]) >= 0) & (self._mdot(X, e["u"][1]) >= 0)
            ends = np.minimum(*[np.arccosh(np.maximum(-self._mdot(X, c), 1.0)) for c in e["ends"]])
            out.append(np.where(inside, line, ends))
        return np.stack(out)

    def _in_removed(self, d: _TriangleData, p: np.ndarray, tol: float) -> bool:
        X = p.reshape(3, 1)
        return bool((self._vertex_dist(d, X) < self.r_vertex - tol).any() or (self._edge_dist(d, X) < self.r_edge - tol).any())

    def core_distance(self, t: int, x: np.ndarray) -> float:
        """Distance from ``x`` (standard frame of t) to the triangle minus its face sets."""
        d = self.data[t]
        if not self._in_removed(d, x, 0.0):
            return 0.0
        cands = list(d.corners)
        for i in range(3):
            P = d.V[:, i]
            if hdist(P, x) > 0:
                cands.append(exp_map(P, tangent_at(P, x), self.r_vertex))
        for e in d.edges:
            s = minkowski_dot(x, e["n"])
            f = x - s * e["n"]
            f = f / math.sqrt(-minkowski_dot(f, f))
            cands.append(math.cosh(self.r_edge) * f + math.sinh(self.r_edge) * e["n"])
            for c in e["ends"]:
                if hdist(c, x) > 0:
                    cands.append(exp_map(c, tangent_at(c, x), self.r_edge))
        best = math.inf
        for p in cands:
            b = d.Vinv @ p
            if b.min() < -SHELL_TOL * abs(b.sum()) or self._in_removed(d, p, SHELL_TOL):
                continue
            best = min(best, hdist(x, p))
        return best

    def simplices_of(self, t: int) -> List[Simplex]:
        """Row labels of ``member_matrix``: the three vertices, the three edges, the triangle."""
        d = self.data[t]
        return [frozenset((v,)) for v in d.verts] + [e["simplex"] for e in d.edges] + [frozenset(d.verts)]

    def member_matrix(self, t: int, X: np.ndarray) -> np.ndarray:
        """Boolean 7 x n matrix: which faces of t have a cover set containing each column of X."""
        d = self.data[t]
        B = d.Vinv @ X
        present = B / B.sum(axis=0) > SUPPORT_TOL
        vd = self._vertex_dist(d, X)
        ed = self._edge_dist(d, X)
        out = np.zeros((7, X.shape[1]), dtype=bool)
        out[:3] = present & (vd < self.r_vertex)
        for k, e in enumerate(d.edges):
            a, b = e["local"]
            out[3 + k] = present[a] & present[b] & (ed[k] < self.r_edge)
        interior = present.all(axis=0)
        depth = np.maximum((self.r_vertex - vd).max(axis=0), (self.r_edge - ed).max(axis=0))
        out[6] = interior & (depth <= 0)
        for j in np.nonzero(interior & (depth > 0) & (depth < self.r_tri))[0]:
            out[6, j] = self.core_distance(t, X[:, j]) < self.r_tri
        return out

    def members_in(self, t: int, X: np.ndarray) -> List[List[Simplex]]:
        """Cover sets containing each column of X (standard frame of triangle t)."""
        labels = self.simplices_of(t)
        M = self.member_matrix(t, X)
        return [[labels[i] for i in np.nonzero(M[:, j])[0]] for j in range(X.shape[1])]

    def members(self, p: Point) -> List[Simplex]:
        return self.members_in(p.triangle, self.Y.position(p).reshape(3, 1))[0]


# --- decompositions ------------------------------------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    simplices: Tuple[Simplex, ...]  # Sigma_0 .. Sigma_{k+1}
    positions: Tuple[float, ...]  # arc-length parameters of x_0 .. x_{k+1}
    length: float

    @property
    def k(self) -> int:
        return len(self.simplices) - 2

    @property
    def intersections(self) -> Tuple[Simplex, ...]:
        return tuple(a & b for a, b in zip(self.simplices, self.simplices[1:]))

    def is_anchored(self) -> bool:
        return all(not (a <= b or b <= a) for a, b in zip(self.simplices, self.simplices[1:]))

    def inner(self) -> Optional[Tuple[float, float]]:
        """Parameters of x_1 and x_k, whose subsegment has the decomposition Sigma_1 .. Sigma_k."""
        if self.k < 2:
            return None
        return self.positions[1], self.positions[-2]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "simplices": [sorted(s) for s in self.simplices],
            "positions": list(self.positions),
            "anchored": self.is_anchored(),
        }


def sample_memberships(cover: Cover, g: Geodesic, step: float) -> Tuple[np.ndarray, Dict[Simplex, np.ndarray]]:
    """Arc-length samples along ``g`` (spacing <= step, ends included) and, per simplex,
    the sorted indices of the samples inside its cover set."""
    Y = cover.Y
    if not g.steps:
        return np.array([0.0]), {tau: np.array([0]) for tau in cover.members(g.x)}
    params, rows = [], []
    offset = 0.0
    base = np.array([0.0, 0.0, 1.0])
    for st in g.steps:
        leg = st.leg
        u = tangent_at(base, leg.target)
        for i, s0, s1 in leg.pieces:
            n = max(2, int(math.ceil((s1 - s0) / step)) + 1)
            s = np.linspace(s0, s1, n)
            t = leg.chain[i]
            D = np.column_stack([leg.coords[i][v] for v in Y.triangles[t]])
            F = np.column_stack([Y.frames[t][v] for v in Y.triangles[t]])
            X = np.outer(base, np.cosh(s)) + np.outer(u, np.sinh(s))
            M = cover.member_matrix(t, F @ np.linalg.solve(D, X))
            params.append(offset + (leg.length - s if st.reversed else s))
            rows.append((cover.simplices_of(t), M))
        offset += leg.length
    s = np.concatenate(params)
    order = np.argsort(s, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    where: Dict[Simplex, List[np.ndarray]] = {}
    start = 0
    for labels, M in rows:
        n = M.shape[1]
        for i, tau in enumerate(labels):
            idx = np.nonzero(M[i])[0]
            if len(idx):
                where.setdefault(tau, []).append(rank[start + idx])
        start += n
    return s[order], {tau: np.unique(np.concatenate(v)) for tau, v in where.items()}


def decompose(cover: Cover, g: Geodesic, step: Optional[float] = None) -> Decomposition:
    """Shortest simplex sequence covering ``g`` through the cover, found by layered search."""
    step = step or cover.k.epsilon / 4
    s, where = sample_memberships(cover, g, step)
    last = len(s) - 1
    covered = np.zeros(len(s), dtype=bool)
    for idx in where.values():
        covered[idx] = True
    if not covered.all():
        j = int(np.nonzero(~covered)[0][0])
        raise CoverError(f"no cover set contains the point at parameter {s[j]}")
    layer = {tau: 0 for tau, idx in where.items() if idx[0] == 0}
    back: List[Dict[Simplex, Tuple[Simplex, int]]] = [{tau: (None, 0) for tau in layer}]
    for _ in range(len(where) + 1):
        done = [tau for tau in layer if where[tau][-1] == last]
        if done:
            return _backtrack(back, min(done, key=sorted), s, g.length)
        nxt: Dict[Simplex, int] = {}
        links: Dict[Simplex, Tuple[Simplex, int]] = {}
        for tau, e in sorted(layer.items(), key=lambda kv: sorted(kv[0])):
            for other, idx in where.items():
                if other == tau or not (other & tau):
                    continue
                i = int(np.searchsorted(idx, e))
                if i < len(idx) and idx[i] < nxt.get(other, last + 1):
                    nxt[other] = int(idx[i])
                    links[other] = (tau, int(idx[i]))
        layer = nxt
        back.append(links)
    raise CoverError("cover sets do not chain along the geodesic")


def _backtrack(back, tau, s, length) -> Decomposition:
    seq, idx = [tau], []
    for links in reversed(back[1:]):
        prev, j = links[seq[-1]]
        idx.append(j)
        seq.append(prev)
    seq.reverse()
    idx.reverse()
    if len(seq) == 1:
        # x and y share one cover set: Sigma_0 = Sigma_1
        return Decomposition((tau, tau), (0.0, float(length)), float(length))
    # idx[i] is where seq[i + 1] was first reached; the last set is used at y itself
    positions = [0.0] + [float(s[j]) for j in idx[:-1]] + [float(length)]
    return Decomposition(tuple(seq), tuple(positions), float(length))


# --- sampling near the skeleton --------------------------------------------------------------

def sample_near_skeleton(Y: PHComplex, k: CoverConstants, rng: np.random.Generator) -> Point:
    """A random point, biased toward vertices and edges where cover sets overlap."""
    kind = rng.integers(3)
    if kind == 0:
        return random_point(Y, rng)
    if kind == 1:
        v = int(rng.choice(Y.vertices))
        return shoot(Y, Y.vertex_point(v), rng.random() * 2 * math.pi, 8 * k.epsilon0 * rng.random(), rng)[0]
    e = Y.edges[int(rng.integers(len(Y.edges)))]
    t = Y.edge_triangles[e][0]
    w = rng.random()
    a, b = sorted(e)
    p = Point.at(t, [w if u == a else (1 - w if u == b else 0.0) for u in Y.triangles[t]])
    return shoot(Y, p, rng.random() * 2 * math.pi, 6 * k.epsilon * rng.random(), rng)[0]


def in_open_star(Y: PHComplex, p: Point, tau: Simplex) -> bool:
    return tau <= Y.support(p)


@dataclass(frozen=True)
class CoverCheck:
    pairs: int
    uncovered: int  # points in no cover set
    not_nested: int  # points in the sets of two incomparable simplices
    leaks: int  # (p, q) with d(p, q) < eps, p in U_tau, q outside st(tau)
    examples: Tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not (self.uncovered or self.not_nested or self.leaks)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["examples"] = list(self.examples)
        return d


def cover_check(Y: PHComplex, cover: Cover, pairs: int, seed: int = 0) -> CoverCheck:
    """Sample pairs (p, q) with d(p, q) < eps near the skeleton and test covering, (cap) and (*)."""
    rng = np.random.default_rng(seed)
    uncovered = not_nested = leaks = 0
    examples: List[str] = []
    for _ in range(pairs):
        p = sample_near_skeleton(Y, cover.k, rng)
        q, _ = shoot(Y, p, rng.random() * 2 * math.pi, cover.k.epsilon * rng.random() * (1 - 1e-9), rng)
        sets = cover.members(p)
        if not sets:
            uncovered += 1
            examples.append(f"uncovered {p}")
        if any(not (a <= b or b <= a) for a in sets for b in sets):
            not_nested += 1
            examples.append(f"incomparable sets {[sorted(a) for a in sets]} at {p}")
        support = Y.support(q)
        for tau in sets:
            if not tau <= support:
                leaks += 1
                examples.append(f"{p} in U_{sorted(tau)} but {q} is outside its star")
    return CoverCheck(pairs, uncovered, not_nested, leaks, tuple(examples[:10]))


# --- the angle bound between incomparable cover sets -----------------------------------------

def pair_kind(a: Simplex, b: Simplex) -> str:
    """Type of a pair of incomparable simplices through a common vertex."""
    if len(a) == len(b) == 3:
        return "triangle/triangle, common edge" if len(a & b) == 2 else "triangle/triangle, common vertex"
    if len(a) == len(b) == 2:
        return "edge/edge"
    return "edge/triangle"


@dataclass
class AngleStats:
    pairs: int = 0
    violations: int = 0
    smallest: float = math.inf


@dataclass(frozen=True)
class AngleCheck:
    pairs: int
    violations: int
    bound: float  # 4 alpha
    by_kind: Dict[str, AngleStats]

    @property
    def smallest(self) -> float:
        return min((s.smallest for s in self.by_kind.values()), default=math.inf)

    def to_dict(self) -> dict:
        return {"pairs": self.pairs, "violations": self.violations, "bound": self.bound,
                "by_kind": {k: asdict(v) for k, v in sorted(self.by_kind.items())}}


def _star_pool(Y: PHComplex, cover: Cover, v: int, size: int, rng: np.random.Generator):
    """Points of the open star of ``v`` with their direction at ``v`` and the cover sets containing them.

    Rays leave ``v`` close to the edges half of the time, where the sets of
    different simplices at ``v`` come closest to each other, and end near the
    boundary sphere of U_v.
    """
    pool = []
    while len(pool) < size:
        t = int(rng.choice(Y.vertex_triangles[v]))
        angle = Y.angle(t, v)
        if rng.random() < 0.5:
            off = min(rng.exponential(0.05 * angle), angle)
            theta = off if rng.random() < 0.5 else angle - off
        else:
            theta = rng.random() * angle
        # sets of simplices through v other than v itself start just outside U_v
        r = cover.r_vertex + (rng.random() - 0.25) * 4 * cover.r_edge + rng.exponential(0.05)
        corner = Point.at(t, [1.0 if u == v else 0.0 for u in Y.triangles[t]])
        p, _ = shoot(Y, corner, theta, r, rng)
        if not in_open_star(Y, p, frozenset((v,))):
            continue
        direction = projection(Y, v, p)
        sets = [s for s in cover.members(p) if v in s and len(s) > 1]
        if direction is not None and sets:
            pool.append((direction, sets))
    return pool


def angle_check(Y: PHComplex, cover: Cover, pairs: int, seed: int = 0,
                pool_size: Optional[int] = None) -> AngleCheck:
    """Test angle_v(x, y) >= 4 alpha for x in U_tau, y in U_tau' with tau, tau' incomparable at v.

    Pairs are drawn from per-vertex pools of sampled points; a pair counts
    only when the two points lie in the sets of two incomparable simplices
    through ``v``.  Results are split by the type of the pair of simplices.
    """
    rng = np.random.default_rng(seed)
    bound = 4 * cover.k.alpha
    verts = list(Y.vertices)
    if pool_size is None:
        pool_size = max(20, min(200, 4 * pairs // len(verts)))
    pools = {v: _star_pool(Y, cover, v, pool_size, rng) for v in verts}
    stats: Dict[str, AngleStats] = {}
    checked = bad = 0
    while checked < pairs:
        v = int(rng.choice(verts))
        (p, ps), (q, qs) = (pools[v][int(i)] for i in rng.integers(len(pools[v]), size=2))
        kinds = {pair_kind(a, b) for a in ps for b in qs if not (a <= b or b <= a)}
        if not kinds:
            continue
        checked += 1
        ang = min(link_distance(Y, p, q), math.pi)
        bad += ang < bound
        for kind in kinds:
            st = stats.setdefault(kind, AngleStats())
            st.pairs += 1
            st.violations += ang < bound
            st.smallest = min(st.smallest, ang)
    return AngleCheck(checked, bad, bound, stats)
