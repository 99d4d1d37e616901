"""Finite piecewise hyperbolic 2-complexes built from triangle shapes."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from ..hyp_trig import GluingError, HypTriangleShape, IDENTITY_TOL, place_triangle, solve_sss
from ..links import MetricGraph, weighted_girth

Simplex = FrozenSet[int]
BARY_TOL = 1e-12


class OutsideComplexError(ValueError):
    pass


class NotCertifiedError(ValueError):
    pass


@dataclass(frozen=True)
class Point:
    """A point of a complex: a triangle and normalized Klein-barycentric weights."""

    triangle: int
    bary: Tuple[float, float, float]

    @classmethod
    def at(cls, triangle: int, bary: Sequence[float]) -> "Point":
        b = [0.0 if abs(x) <= BARY_TOL else float(x) for x in bary]
        total = sum(b)
        return cls(triangle, tuple(x / total for x in b))


@dataclass(frozen=True)
class PHComplex:
    """Triangles as vertex-id triples; side ``i`` of a shape is opposite local vertex ``i``."""

    triangles: Tuple[Tuple[int, int, int], ...]
    shapes: Tuple[HypTriangleShape, ...]

    def __post_init__(self):
        if len(self.triangles) != len(self.shapes):
            raise ValueError("one shape per triangle")
        seen = set()
        for t, tri in enumerate(self.triangles):
            if len(set(tri)) != 3:
                raise ValueError(f"triangle {t} has a repeated vertex")
            if frozenset(tri) in seen:
                raise ValueError(f"triangle {t} repeats the vertex set of another triangle")
            seen.add(frozenset(tri))
        for edge, tris in self.edge_triangles.items():
            lengths = [self.edge_length_in(t, edge) for t in tris]
            if max(lengths) - min(lengths) > IDENTITY_TOL:
                raise GluingError(f"edge {sorted(edge)} has lengths {lengths}")

    # --- combinatorics --------------------------------------------------------------

    @cached_property
    def vertices(self) -> List[int]:
        return sorted({v for tri in self.triangles for v in tri})

    @cached_property
    def edge_triangles(self) -> Dict[Simplex, List[int]]:
        out: Dict[Simplex, List[int]] = {}
        for t, tri in enumerate(self.triangles):
            for i in range(3):
                out.setdefault(frozenset((tri[(i + 1) % 3], tri[(i + 2) % 3])), []).append(t)
        return out

    @cached_property
    def vertex_triangles(self) -> Dict[int, List[int]]:
        out: Dict[int, List[int]] = {}
        for t, tri in enumerate(self.triangles):
            for v in tri:
                out.setdefault(v, []).append(t)
        return out

    @property
    def edges(self) -> List[Simplex]:
        return sorted(self.edge_triangles, key=sorted)

    def simplex_of(self, t: int) -> Simplex:
        return frozenset(self.triangles[t])

    def simplices(self) -> List[Simplex]:
        out = [frozenset((v,)) for v in self.vertices] + self.edges
        return out + [self.simplex_of(t) for t in range(len(self.triangles))]

    def local(self, t: int, v: int) -> int:
        return self.triangles[t].index(v)

    def edge_length_in(self, t: int, edge: Simplex) -> float:
        (opposite,) = set(self.triangles[t]) - edge
        return self.shapes[t].sides[self.local(t, opposite)]

    def edge_length(self, edge: Simplex) -> float:
        return self.edge_length_in(self.edge_triangles[edge][0], edge)

    def distance_in(self, t: int, a: int, b: int) -> float:
        return self.edge_length_in(t, frozenset((a, b)))

    def angle(self, t: int, v: int) -> float:
        return self.shapes[t].angles[self.local(t, v)]

    def corner(self, t: int, v: int) -> Tuple[int, int]:
        """The two other vertices of ``t`` in local cyclic order after ``v``."""
        i = self.local(t, v)
        tri = self.triangles[t]
        return tri[(i + 1) % 3], tri[(i + 2) % 3]

    def neighbors_across(self, t: int, edge: Simplex) -> List[int]:
        return [u for u in self.edge_triangles[edge] if u != t]

    def star(self, tau: Simplex) -> List[int]:
        return [t for t, tri in enumerate(self.triangles) if tau <= set(tri)]

    # --- metric data ------------------------------------------------------------------

    @cached_property
    def frames(self) -> List[Dict[int, np.ndarray]]:
        """Each triangle placed in its own standard frame, keyed by vertex id."""
        return [dict(zip(tri, place_triangle(shape))) for tri, shape in zip(self.triangles, self.shapes)]

    @cached_property
    def _inverse_frames(self) -> List[np.ndarray]:
        return [np.linalg.inv(np.column_stack([f[v] for v in tri])) for f, tri in zip(self.frames, self.triangles)]

    @cached_property
    def vertex_legs(self):
        """Straight legs from every vertex to every vertex it sees (computed once)."""
        from .paths import all_vertex_legs

        return all_vertex_legs(self)

    def min_angle(self) -> float:
        return min(min(s.angles) for s in self.shapes)

    def link(self, v: int) -> MetricGraph:
        L = MetricGraph(f"lk({v})")
        for t in self.vertex_triangles[v]:
            a, b = self.corner(t, v)
            for w in (a, b):
                if str(w) not in L.nodes:
                    L.add_node(str(w), "edge")
            L.add_edge(str(a), str(b), self.angle(t, v))
        return L

    def link_girth(self, v: int) -> float:
        return weighted_girth(self.link(v))[0]

    @cached_property
    def link_girths(self) -> Dict[int, float]:
        return {v: self.link_girth(v) for v in self.vertices}

    def certify(self) -> None:
        """Raise unless every vertex link has girth > 2 pi and the complex is connected."""
        G = nx.Graph()
        G.add_nodes_from(range(len(self.triangles)))
        for tris in self.edge_triangles.values():
            nx.add_path(G, tris)
        if not nx.is_connected(G):
            raise NotCertifiedError("complex is not connected through edges")
        for v, g in self.link_girths.items():
            if g <= 2 * math.pi:
                raise NotCertifiedError(f"link of vertex {v} has girth {g} <= 2 pi")

    def is_acute(self) -> Tuple[bool, Optional[Tuple[int, int, float]]]:
        for t, (tri, shape) in enumerate(zip(self.triangles, self.shapes)):
            for i, a in enumerate(shape.angles):
                if a >= math.pi / 2:
                    return False, (t, tri[i], a)
        return True, None

    def rescale(self, n: int) -> "PHComplex":
        if n < 1:
            raise ValueError("rescaling factor must be at least 1")
        if n == 1:
            return self
        return PHComplex(self.triangles, tuple(solve_sss(*(s / n for s in shape.sides)) for shape in self.shapes))

    # --- points -------------------------------------------------------------------------

    def check_point(self, p: Point) -> None:
        if not 0 <= p.triangle < len(self.triangles) or min(p.bary) < -BARY_TOL or len(p.bary) != 3:
            raise OutsideComplexError(f"{p} is not a point of the complex")

    def support(self, p: Point) -> Simplex:
        tri = self.triangles[p.triangle]
        return frozenset(v for v, b in zip(tri, p.bary) if b > BARY_TOL)

    def weights(self, p: Point) -> Dict[int, float]:
        return {v: b for v, b in zip(self.triangles[p.triangle], p.bary) if b > BARY_TOL}

    def carriers(self, p: Point) -> List[Point]:
        """The same point expressed in every triangle containing its carrier simplex."""
        w = self.weights(p)
        out = [p]
        for t in self.star(frozenset(w)):
            if t != p.triangle:
                out.append(Point.at(t, [w.get(v, 0.0) for v in self.triangles[t]]))
        return out

    def position(self, p: Point, frame: Optional[Dict[int, np.ndarray]] = None) -> np.ndarray:
        frame = frame or self.frames[p.triangle]
        x = sum(b * frame[v] for v, b in zip(self.triangles[p.triangle], p.bary))
        return x / math.sqrt(-(x[0] * x[0] + x[1] * x[1] - x[2] * x[2]))

    def point_from(self, t: int, x: np.ndarray, frame: Optional[Dict[int, np.ndarray]] = None) -> Point:
        """Locate hyperboloid coordinates ``x`` given in ``frame`` (default: t's standard frame)."""
        if frame is None:
            b = self._inverse_frames[t] @ x
        else:
            b = np.linalg.solve(np.column_stack([frame[v] for v in self.triangles[t]]), x)
        b = np.clip(b, 0.0, None)
        return Point.at(t, b)

    def vertex_point(self, v: int) -> Point:
        t = self.vertex_triangles[v][0]
        return Point.at(t, [1.0 if u == v else 0.0 for u in self.triangles[t]])

    # --- serialization ---------------------------------------------------------------------

    def gluings(self) -> List[Tuple[Tuple[int, int], Tuple[int, int], bool]]:
        out = []
        for edge in self.edges:
            first, *rest = self.edge_triangles[edge]
            i = self.local(first, next(iter(set(self.triangles[first]) - edge)))
            for t2 in rest:
                j = self.local(t2, next(iter(set(self.triangles[t2]) - edge)))
                flip = self.triangles[first][(i + 1) % 3] != self.triangles[t2][(j + 2) % 3]
                out.append(((first, i), (t2, j), flip))
        return out

    def to_dict(self) -> dict:
        return {
            "triangles": [{"sides": list(s.sides), "vertices": list(tri)} for tri, s in zip(self.triangles, self.shapes)],
            "gluings": [{"edge": [list(a), list(b)], "flip": flip} for a, b, flip in self.gluings()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def from_triangles(triangles: Iterable[Sequence[int]], shapes: Sequence[HypTriangleShape]) -> PHComplex:
    return PHComplex(tuple(tuple(int(v) for v in tri) for tri in triangles), tuple(shapes))


def from_dict(doc: dict) -> PHComplex:
    """Build from triangle side lengths and edge gluings; vertex ids come from the gluings."""
    try:
        sides = [tuple(float(x) for x in t["sides"]) for t in doc["triangles"]]
        gluings = doc.get("gluings", [])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed complex document: {exc}") from None
    n = len(sides)
    parent = list(range(3 * n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for g in gluings:
        (t, i), (t2, j) = g["edge"]
        if not (0 <= t < n and 0 <= t2 < n and 0 <= i < 3 and 0 <= j < 3):
            raise ValueError(f"gluing {g} refers to a missing triangle or edge")
        pairs = [((i + 1) % 3, (j + 2) % 3), ((i + 2) % 3, (j + 1) % 3)]
        if g.get("flip", False):
            pairs = [((i + 1) % 3, (j + 1) % 3), ((i + 2) % 3, (j + 2) % 3)]
        for a, b in pairs:
            parent[find(3 * t + a)] = find(3 * t2 + b)
    ids: Dict[int, int] = {}
    triangles = []
    for t in range(n):
        triangles.append(tuple(ids.setdefault(find(3 * t + i), len(ids)) for i in range(3)))
    explicit = [t.get("vertices") for t in doc["triangles"]]
    if all(v is not None for v in explicit):
        # explicit ids may identify more corners (vertex-only contacts) but never fewer
        corner_id = {}
        for t, tri in enumerate(triangles):
            for i in range(3):
                if corner_id.setdefault(tri[i], explicit[t][i]) != explicit[t][i]:
                    raise GluingError(f"gluings identify corner ({t},{i}) with a differently named vertex")
        triangles = [tuple(int(v) for v in tri) for tri in explicit]
    return PHComplex(tuple(triangles), tuple(solve_sss(*s) for s in sides))


def loads(text: str) -> PHComplex:
    return from_dict(json.loads(text))


# --- hand-built acute test complexes ------------------------------------------------------

DEFAULT_ANGLE = 0.95


def equilateral(angle: float = DEFAULT_ANGLE) -> HypTriangleShape:
    """Equilateral hyperbolic triangle with the given (acute) angle."""
    c = math.cos(angle)
    side = math.acosh(c / (1 - c))
    return solve_sss(side, side, side)


def uniform(triangles: Sequence[Sequence[int]], angle: float = DEFAULT_ANGLE) -> PHComplex:
    shape = equilateral(angle)
    return from_triangles(triangles, [shape] * len(triangles))


def heptagonal_ball(angle: float = DEFAULT_ANGLE) -> PHComplex:
    """Two rings of triangles around a centre, seven triangles at every interior vertex (35 triangles)."""
    centre, ring = 0, list(range(1, 8))
    tris = [(centre, ring[i], ring[(i + 1) % 7]) for i in range(7)]
    nxt = 8
    shared = []
    for i in range(7):
        shared.append(nxt)
        tris.append((ring[(i + 1) % 7], ring[i], nxt))
        nxt += 1
    for i in range(7):
        a, b = nxt, nxt + 1
        nxt += 2
        before, after = shared[i - 1], shared[i]
        tris += [(ring[i], before, a), (ring[i], a, b), (ring[i], b, after)]
    return uniform(tris, angle)


def book(pages: int = 3, angle: float = DEFAULT_ANGLE) -> PHComplex:
    """Pages of three triangles each, all sharing the spine edge (0, 1)."""
    tris = []
    nxt = 2
    for _ in range(pages):
        a, c, d = nxt, nxt + 1, nxt + 2
        nxt += 3
        tris += [(0, 1, a), (0, a, c), (1, d, a)]
    return uniform(tris, angle)


def two_flowers(angle: float = DEFAULT_ANGLE) -> PHComplex:
    """Seven triangles around each of two adjacent centres 0 and 1 (12 triangles)."""
    petals = [1, 2, 3, 4, 5, 6, 7]
    tris = [(0, petals[i], petals[(i + 1) % 7]) for i in range(7)]
    # around 1 the cyclic order is 0, 7, 8, 9, 10, 11, 2; two of these triangles already exist
    ring = [0, 7, 8, 9, 10, 11, 2]
    tris += [(1, ring[i], ring[i + 1]) for i in range(1, 6)]
    return uniform(tris, angle)


TEST_COMPLEXES = {
    "heptagonal-ball": heptagonal_ball,
    "book": book,
    "two-flowers": two_flowers,
}
