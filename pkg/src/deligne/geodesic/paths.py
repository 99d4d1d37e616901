"""Geodesics by developing triangle chains into the hyperbolic plane.

A geodesic of a piecewise hyperbolic 2-complex is a polyline that bends only
at vertices; each straight leg lies in a chain of triangles that develops
isometrically into H^2.  Legs are found by a depth-first search over chains
that carries the angular window of directions still passing through the
chain, and the legs are combined by Dijkstra over the endpoints and vertices.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple, Union

import numpy as np

from ..hyp_trig import angle_at, boost_to_origin, from_polar, hdist, side_of_line, tangent_at, third_point, to_klein
from .complex import PHComplex, Point, Simplex

ORIGIN = from_polar(0.0, 0.0)
SEARCH_BUDGET = 10_000
WINDOW_TOL = 1e-12
LOCAL_GEODESIC_TOL = 1e-9

Node = Union[int, str]  # vertex id, or "x" / "y" for the query endpoints


class SearchBudgetExceeded(RuntimeError):
    pass


def _cross(a, b) -> float:
    return a[0] * b[1] - a[1] * b[0]


def _unit2(x) -> Optional[np.ndarray]:
    d = np.array([x[0], x[1]])
    n = math.hypot(d[0], d[1])
    return d / n if n > 1e-300 else None


def _in_window(window, d) -> bool:
    if window is None:
        return True
    L, R = window
    return _cross(L, d) >= -WINDOW_TOL and _cross(d, R) >= -WINDOW_TOL


def _narrow(window, A, B):
    """Directions of ``window`` that pass through the segment AB, or None."""
    a, b = _unit2(A), _unit2(B)
    if a is None or b is None:
        return None
    if _cross(a, b) < 0:
        a, b = b, a
    if window is None:
        L, R = a, b
    else:
        L, R = window
        L = a if _cross(L, a) > 0 else L
        R = b if _cross(b, R) > 0 else R
    width = math.atan2(_cross(L, R), float(L @ R))
    return (L, R) if width > WINDOW_TOL else None


def develop_across(Y: PHComplex, coords: Dict[int, np.ndarray], t: int, edge: Simplex, t2: int) -> Dict[int, np.ndarray]:
    """Coordinates of triangle ``t2`` glued to developed triangle ``t`` along ``edge``."""
    a, b = sorted(edge)
    (old,) = set(Y.triangles[t]) - edge
    (new,) = set(Y.triangles[t2]) - edge
    P, Q = coords[a], coords[b]
    sign = -1.0 if side_of_line(P, Q, coords[old]) > 0 else 1.0
    X = third_point(P, Q, Y.distance_in(t2, new, a), Y.distance_in(t2, new, b), sign)
    return {a: P, b: Q, new: X}


def position_in(Y: PHComplex, p: Point, coords: Dict[int, np.ndarray]) -> np.ndarray:
    """Developed position of ``p`` given coordinates for one of its carrier triangles."""
    t = p.triangle
    x = sum(b * coords[v] for v, b in zip(Y.triangles[t], p.bary))
    return x / math.sqrt(x[2] * x[2] - x[0] * x[0] - x[1] * x[1])


@dataclass(frozen=True)
class Leg:
    """A straight piece developed with its start at the base point of H^2."""

    start: Node
    end: Node
    length: float
    chain: Tuple[int, ...]
    coords: Tuple[Dict[int, np.ndarray], ...]
    target: np.ndarray = field(repr=False)

    @cached_property
    def klein_end(self) -> np.ndarray:
        return to_klein(self.target)

    def clip(self, i: int) -> Tuple[float, float]:
        """Fraction interval (Klein parameter) of the leg inside chain triangle ``i``."""
        k = self.klein_end
        tri = [to_klein(x) for x in self.coords[i].values()]
        lo, hi = 0.0, 1.0
        for j in range(3):
            p, q, r = tri[j], tri[(j + 1) % 3], tri[(j + 2) % 3]
            s = _cross(q - p, r - p)
            # orientation of (p, q, lam k) is c0 + lam c1
            c0 = _cross(q - p, -p) * s
            c1 = _cross(q - p, k) * s
            tol = 1e-13 * abs(s)
            if abs(c1) < 1e-300:
                if c0 < -tol:
                    return 1.0, 0.0
                continue
            lam = (-tol - c0) / c1
            if c1 > 0:
                lo = max(lo, lam)
            else:
                hi = min(hi, lam)
        return lo, hi

    def arc(self, lam: float) -> float:
        return math.atanh(min(lam * float(np.linalg.norm(self.klein_end)), 1 - 1e-16))

    def point(self, Y: PHComplex, s: float, i: int) -> Point:
        x = np.array([0.0, 0.0, 1.0]) if s <= 0 else math.cosh(s) * ORIGIN + math.sinh(s) * tangent_at(ORIGIN, self.target)
        return _locate(Y, self.chain[i], self.coords[i], x)

    @cached_property
    def pieces(self) -> Tuple[Tuple[int, float, float], ...]:
        """(chain index, s0, s1) for every chain triangle the leg actually meets."""
        out = []
        for i in range(len(self.chain)):
            lo, hi = self.clip(i)
            if hi >= lo:
                out.append((i, self.arc(max(lo, 0.0)), self.arc(min(hi, 1.0))))
        return tuple(out)

    def simplices(self, Y: PHComplex) -> List[Simplex]:
        """Open simplices met by the leg, in order."""
        out: List[Simplex] = []
        for i, s0, s1 in self.pieces:
            for s in (s0, (s0 + s1) / 2, s1):
                tau = Y.support(self.point(Y, s, i))
                if not out or out[-1] != tau:
                    out.append(tau)
        return out


def _locate(Y: PHComplex, t: int, coords: Dict[int, np.ndarray], x: np.ndarray) -> Point:
    M = np.column_stack([coords[v] for v in Y.triangles[t]])
    b = np.linalg.solve(M, x)
    return Point.at(t, np.clip(b, 0.0, None))


def _start_frames(Y: PHComplex, source: Union[Point, int]):
    """(triangle, developed coords with the source at the base point, support) per carrier."""
    if isinstance(source, Point):
        carriers = Y.carriers(source)
        support = Y.support(source)
        for c in carriers:
            frame = Y.frames[c.triangle]
            M = boost_to_origin(Y.position(c))
            yield c.triangle, {v: M @ frame[v] for v in Y.triangles[c.triangle]}, support
    else:
        for t in Y.vertex_triangles[source]:
            frame = Y.frames[t]
            M = boost_to_origin(frame[source])
            yield t, {v: M @ frame[v] for v in Y.triangles[t]}, frozenset((source,))


def visible(Y: PHComplex, source: Union[Point, int], target: Optional[Point] = None,
            budget: int = SEARCH_BUDGET) -> Dict[Node, Leg]:
    """Shortest straight legs from ``source`` to every vertex (and ``target``) it sees."""
    start = source if isinstance(source, int) else "x"
    target_carriers = {c.triangle: c for c in Y.carriers(target)} if target is not None else {}
    best: Dict[Node, Leg] = {}
    steps = 0

    def offer(key, X, chain, coords):
        d = hdist(ORIGIN, X)
        if d <= 0 or key == start:
            return
        if key not in best or d < best[key].length:
            best[key] = Leg(start, key, d, chain, coords, X)

    def targets(t, coords, window, chain, chain_coords):
        for v in Y.triangles[t]:
            d = _unit2(coords[v])
            if d is not None and _in_window(window, d):
                offer(v, coords[v], chain, chain_coords)
        if t in target_carriers:
            X = position_in(Y, target_carriers[t], coords)
            d = _unit2(X)
            if d is None:
                offer("y", X, chain, chain_coords)  # target coincides with the source
            elif _in_window(window, d):
                offer("y", X, chain, chain_coords)

    stack = []
    for t, coords, support in _start_frames(Y, source):
        targets(t, coords, None, (t,), (coords,))
        tri = Y.triangles[t]
        for i in range(3):
            edge = frozenset((tri[(i + 1) % 3], tri[(i + 2) % 3]))
            if support <= edge:
                continue
            a, b = sorted(edge)
            window = _narrow(None, coords[a], coords[b])
            if window is not None:
                stack.append((t, coords, edge, window, (t,), (coords,)))
    while stack:
        t, coords, edge, window, chain, chain_coords = stack.pop()
        for t2 in Y.neighbors_across(t, edge):
            steps += 1
            if steps > budget:
                raise SearchBudgetExceeded(f"more than {budget} chain extensions")
            c2 = develop_across(Y, coords, t, edge, t2)
            ch, cc = chain + (t2,), chain_coords + (c2,)
            targets(t2, c2, window, ch, cc)
            (new,) = set(Y.triangles[t2]) - edge
            for v in edge:
                nxt = frozenset((v, new))
                w2 = _narrow(window, c2[v], c2[new])
                if w2 is not None:
                    stack.append((t2, c2, nxt, w2, ch, cc))
    if target is not None and "y" in best and best["y"].length == 0:
        best.pop("y")
    return best


def all_vertex_legs(Y: PHComplex) -> Dict[int, Dict[Node, Leg]]:
    return {v: visible(Y, v) for v in Y.vertices}


# --- geodesics ------------------------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    leg: Leg
    reversed: bool

    @property
    def length(self) -> float:
        return self.leg.length


@dataclass
class Geodesic:
    complex: PHComplex
    x: Point
    y: Point
    nodes: List[Node]
    steps: List[Step]

    @property
    def length(self) -> float:
        return sum(s.length for s in self.steps)

    def bend_vertices(self) -> List[int]:
        """Vertices met in the interior of the geodesic (the nodes strictly between x and y)."""
        return [n for n in self.nodes[1:-1] if isinstance(n, int)]

    def _locate_step(self, s: float) -> Tuple[Step, float]:
        for step in self.steps:
            if s <= step.length or step is self.steps[-1]:
                return step, min(max(s, 0.0), step.length)
            s -= step.length
        raise ValueError("empty geodesic")

    def point_at(self, s: float) -> Point:
        if not self.steps:
            return self.x
        step, s = self._locate_step(s)
        leg = step.leg
        s_leg = leg.length - s if step.reversed else s
        for i, s0, s1 in leg.pieces:
            if s0 - 1e-12 <= s_leg <= s1 + 1e-12:
                return leg.point(self.complex, s_leg, i)
        i, _, _ = min(leg.pieces, key=lambda p: min(abs(p[1] - s_leg), abs(p[2] - s_leg)))
        return leg.point(self.complex, s_leg, i)

    def open_simplices(self) -> List[Simplex]:
        """Open simplices met by the geodesic, in order from x to y."""
        Y = self.complex
        if not self.steps:
            return [Y.support(self.x)]
        out: List[Simplex] = []
        for step in self.steps:
            seq = step.leg.simplices(Y)
            for tau in reversed(seq) if step.reversed else seq:
                if not out or out[-1] != tau:
                    out.append(tau)
        return out

    def gallery(self) -> FrozenSet[Simplex]:
        """The smallest subcomplex containing the geodesic, as a set of closed-simplex faces."""
        return closure(self.open_simplices())

    def link_points(self) -> Dict[int, Tuple["LinkPoint", "LinkPoint"]]:
        """Directions (incoming, outgoing) at each bend vertex, as points of its link."""
        out = {}
        for k, v in enumerate(self.nodes[1:-1], start=1):
            if isinstance(v, int):
                out[v] = (direction_at(self.complex, self.steps[k - 1], v, end=True),
                          direction_at(self.complex, self.steps[k], v, end=False))
        return out

    def subsegment(self, a: float, b: float) -> "Geodesic":
        return geodesic(self.complex, self.point_at(a), self.point_at(b))

    def to_dict(self) -> dict:
        return {
            "length": self.length,
            "nodes": [n if isinstance(n, str) else int(n) for n in self.nodes],
            "legs": [{"chain": list(s.leg.chain if not s.reversed else reversed(s.leg.chain)), "length": s.length}
                     for s in self.steps],
            "open_simplices": [sorted(t) for t in self.open_simplices()],
        }


def closure(simplices: Iterable[Simplex]) -> FrozenSet[Simplex]:
    out: Set[Simplex] = set()
    for tau in simplices:
        verts = sorted(tau)
        n = len(verts)
        for mask in range(1, 1 << n):
            out.add(frozenset(verts[i] for i in range(n) if mask >> i & 1))
    return frozenset(out)


@dataclass(frozen=True)
class LinkPoint:
    """A direction at ``vertex``: inside the corner of triangle ``triangle``, at ``offset``
    radians from the edge toward the first corner vertex (``PHComplex.corner``)."""

    vertex: int
    triangle: int
    offset: float


def direction_at(Y: PHComplex, step: Step, v: int, end: bool) -> LinkPoint:
    """Direction at vertex ``v`` of the geodesic step that starts or ends there."""
    leg = step.leg
    at_leg_start = end == step.reversed
    if at_leg_start:
        i = leg.pieces[0][0]
        here, toward = ORIGIN, leg.target
    else:
        i = leg.pieces[-1][0]
        here, toward = leg.target, ORIGIN
    t = leg.chain[i]
    coords = leg.coords[i]
    a, b = Y.corner(t, v)
    here = coords[v]
    offset = angle_at(here, coords[a], toward)
    return LinkPoint(v, t, min(max(offset, 0.0), Y.angle(t, v)))


def geodesic(Y: PHComplex, x: Point, y: Point) -> Geodesic:
    """The geodesic from ``x`` to ``y``, via Dijkstra over straight legs."""
    Y.check_point(x)
    Y.check_point(y)
    sx, sy = Y.support(x), Y.support(y)
    src: Node = next(iter(sx)) if len(sx) == 1 else "x"
    dst: Node = next(iter(sy)) if len(sy) == 1 else "y"
    if src == dst or _same_point(Y, x, y):
        return Geodesic(Y, x, y, [src], [])
    vlegs = Y.vertex_legs
    out_x = vlegs[src] if src != "x" else visible(Y, x, y if dst == "y" else None)
    into_y: Dict[Node, Leg] = {}
    if dst == "y":
        into_y = visible(Y, y)
    dist: Dict[Node, float] = {src: 0.0}
    prev: Dict[Node, Tuple[Node, Step]] = {}
    heap = [(0.0, 0, src)]
    counter = 1
    done = set()
    while heap:
        d, _, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == dst:
            break
        if u == src:
            edges = [(k, Step(leg, False)) for k, leg in out_x.items()]
        else:
            edges = [(k, Step(leg, False)) for k, leg in vlegs[u].items()]
        if u in into_y:
            edges.append(("y", Step(into_y[u], True)))
        if src == "x" and u != src:
            edges = [(k, s) for k, s in edges if k != "x"]
        for k, step in edges:
            if k == "y" and dst != "y":
                continue
            nd = d + step.length
            if nd < dist.get(k, math.inf) - 1e-15:
                dist[k] = nd
                prev[k] = (u, step)
                heapq.heappush(heap, (nd, counter, k))
                counter += 1
    if dst not in dist:
        raise ValueError("target is not reachable from the source")
    nodes, steps = [dst], []
    while nodes[-1] != src:
        u, step = prev[nodes[-1]]
        steps.append(step)
        nodes.append(u)
    return Geodesic(Y, x, y, nodes[::-1], steps[::-1])


def _same_point(Y: PHComplex, x: Point, y: Point) -> bool:
    for c in Y.carriers(y):
        if c.triangle == x.triangle:
            return max(abs(a - b) for a, b in zip(c.bary, x.bary)) < 1e-12
    return False


def local_geodesic_certificate(g: Geodesic) -> List[Tuple[int, float]]:
    """(vertex, link distance between incoming and outgoing directions) at each bend."""
    from .galleries import link_distance

    out = []
    for v, (p, q) in g.link_points().items():
        out.append((v, link_distance(g.complex, p, q)))
    return out


def is_local_geodesic(g: Geodesic, tol: float = LOCAL_GEODESIC_TOL) -> bool:
    return all(d >= math.pi - tol for _, d in local_geodesic_certificate(g))


# --- straight rays ---------------------------------------------------------------------------

def shoot(Y: PHComplex, p: Point, theta: float, dist: float, rng: Optional[np.random.Generator] = None) -> Tuple[Point, float]:
    """Follow the ray from ``p`` at angle ``theta`` (in p's boosted triangle frame) for ``dist``.

    At an edge shared by several triangles the continuation is chosen with
    ``rng`` (the first one when no generator is given).  The ray stops early
    at a free edge or on hitting a vertex; the distance travelled is returned.
    From a vertex, ``theta`` is folded into the corner of ``p.triangle``.
    """
    if dist <= 0:
        return p, 0.0
    t = p.triangle
    (coords,) = [c for tt, c, _ in _start_frames(Y, p) if tt == t][:1]
    support = Y.support(p)
    if len(support) == 1:
        (v,) = support
        a, _ = Y.corner(t, v)
        base = math.atan2(coords[a][1], coords[a][0])
        b_dir = Y.corner(t, v)[1]
        turn = math.copysign(1.0, _cross(_unit2(coords[a]), _unit2(coords[b_dir])))
        theta = base + turn * (theta % Y.angle(t, v))
    u = np.array([math.cos(theta), math.sin(theta)])
    lam_end = math.tanh(dist)
    for _ in range(SEARCH_BUDGET):
        _, hi, exit_edge = _ray_exit(Y, t, coords, u)
        if hi >= lam_end:
            return _locate(Y, t, coords, from_klein_dir(u, lam_end)), dist
        hi = max(hi, 0.0)
        x = from_klein_dir(u, hi)
        here = _locate(Y, t, coords, x)
        if exit_edge is None or len(Y.support(here)) == 1 and hi > 0:
            return here, math.atanh(hi)
        nbrs = Y.neighbors_across(t, exit_edge)
        if not nbrs:
            return here, math.atanh(hi)
        t2 = nbrs[int(rng.integers(len(nbrs)))] if rng is not None and len(nbrs) > 1 else nbrs[0]
        coords = develop_across(Y, coords, t, exit_edge, t2)
        t = t2
    raise SearchBudgetExceeded("ray did not terminate")


def from_klein_dir(u, lam: float) -> np.ndarray:
    w = 1.0 / math.sqrt(1.0 - lam * lam)
    return np.array([u[0] * lam * w, u[1] * lam * w, w])


def _ray_exit(Y: PHComplex, t: int, coords, u):
    """Klein-parameter interval of the ray ``lam * u`` in the triangle and the edge it leaves by."""
    tri = Y.triangles[t]
    k = {v: to_klein(coords[v]) for v in tri}
    lo, hi, edge = 0.0, math.inf, None
    for i in range(3):
        a, b, c = tri[(i + 1) % 3], tri[(i + 2) % 3], tri[i]
        p, q, r = k[a], k[b], k[c]
        s = _cross(q - p, r - p)
        c0 = _cross(q - p, -p) * s
        c1 = _cross(q - p, u) * s
        if abs(c1) < 1e-300:
            continue
        lam = -c0 / c1
        if c1 > 0:
            lo = max(lo, lam)
        elif lam < hi:
            hi, edge = lam, frozenset((a, b))
    return lo, hi, edge


def random_point(Y: PHComplex, rng: np.random.Generator) -> Point:
    t = int(rng.integers(len(Y.triangles)))
    return Point.at(t, rng.dirichlet((1.0, 1.0, 1.0)))
