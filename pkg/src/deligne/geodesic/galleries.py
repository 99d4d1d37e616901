"""Galleries, extended galleries and link distances at vertices."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import islice
from typing import Dict, FrozenSet, List, Sequence, Tuple

import networkx as nx

from .complex import PHComplex, Simplex
from .paths import Geodesic, LinkPoint, closure

SNAP = 1e-12


def _node(Y: PHComplex, p: LinkPoint):
    a, b = Y.corner(p.triangle, p.vertex)
    if p.offset <= SNAP:
        return ("v", a)
    if p.offset >= Y.angle(p.triangle, p.vertex) - SNAP:
        return ("v", b)
    return None


def link_graph(Y: PHComplex, v: int, points: Sequence[LinkPoint]) -> Tuple[nx.Graph, List]:
    """The link of ``v`` with ``points`` inserted into their corner edges.

    Nodes are ("v", w) for neighbouring vertices and ("p", i) for the i-th
    inserted point; every edge carries its angular length ``w`` and the
    triangle ``tri`` whose corner it lies in.
    """
    G = nx.Graph()
    names = []
    on_corner: Dict[int, List[Tuple[float, object]]] = {}
    for i, p in enumerate(points):
        if p.vertex != v:
            raise ValueError(f"{p} is not a direction at vertex {v}")
        node = _node(Y, p)
        if node is None:
            node = ("p", i)
            on_corner.setdefault(p.triangle, []).append((p.offset, node))
        names.append(node)
    for t in Y.vertex_triangles[v]:
        a, b = Y.corner(t, v)
        stops = [(0.0, ("v", a))] + sorted(on_corner.get(t, []), key=lambda s: s[0]) + [(Y.angle(t, v), ("v", b))]
        for (o1, n1), (o2, n2) in zip(stops, stops[1:]):
            if n1 == n2:
                continue
            G.add_edge(n1, n2, w=max(o2 - o1, 0.0), tri=t)
    return G, names


def link_distance(Y: PHComplex, p: LinkPoint, q: LinkPoint) -> float:
    """Angular distance between two directions at the same vertex."""
    if p.vertex != q.vertex:
        raise ValueError("directions at different vertices")
    G, (a, b) = link_graph(Y, p.vertex, [p, q])
    if a == b:
        return 0.0
    try:
        return nx.dijkstra_path_length(G, a, b, weight="w")
    except nx.NetworkXNoPath:
        return math.inf


def angle_between(Y: PHComplex, p: LinkPoint, q: LinkPoint) -> float:
    """Alexandrov angle: link distance capped at pi."""
    return min(link_distance(Y, p, q), math.pi)


def _path_length(G, path) -> float:
    return sum(G[u][v]["w"] for u, v in zip(path, path[1:]))


def two_shortest_paths(Y: PHComplex, p: LinkPoint, q: LinkPoint):
    """(length, triangles) of the shortest link path and the length of the runner-up."""
    G, (a, b) = link_graph(Y, p.vertex, [p, q])
    if a == b:
        return 0.0, (), math.inf
    try:
        paths = list(islice(nx.shortest_simple_paths(G, a, b, weight="w"), 2))
    except nx.NetworkXNoPath:
        return math.inf, (), math.inf
    first = paths[0]
    tris = tuple(sorted({G[u][v]["tri"] for u, v in zip(first, first[1:])}))
    second = _path_length(G, paths[1]) if len(paths) > 1 else math.inf
    return _path_length(G, first), tris, second


@dataclass(frozen=True)
class Extension:
    """Data of one interior vertex of a geodesic for the extended gallery."""

    vertex: int
    link_length: float
    second_length: float
    triangles: Tuple[int, ...]  # the triangles of E_v; empty when the link geodesic is long


@dataclass(frozen=True)
class Gallery:
    open_simplices: Tuple[Simplex, ...]
    simplices: FrozenSet[Simplex]
    extended: FrozenSet[Simplex]
    extensions: Tuple[Extension, ...]

    def vertex_count(self, extended: bool = True) -> int:
        return sum(1 for s in (self.extended if extended else self.simplices) if len(s) == 1)

    def to_dict(self) -> dict:
        return {
            "open_simplices": [sorted(s) for s in self.open_simplices],
            "gallery": sorted(sorted(s) for s in self.simplices),
            "extended": sorted(sorted(s) for s in self.extended),
            "extensions": [
                {"vertex": e.vertex, "link_length": e.link_length, "second_length": e.second_length,
                 "triangles": list(e.triangles)}
                for e in self.extensions
            ],
        }


def extended_gallery(Y: PHComplex, g: Geodesic, alpha: float) -> Gallery:
    """Gallery of ``g`` enlarged by the triangles of short link geodesics at its interior vertices."""
    opens = tuple(g.open_simplices())
    gal = closure(opens)
    extra: List[Simplex] = []
    exts = []
    for v, (p, q) in g.link_points().items():
        length, tris, second = two_shortest_paths(Y, p, q)
        if length < math.pi + 2 * alpha:
            if second < math.pi + 2 * alpha:
                raise AssertionError(f"two link paths shorter than pi + 2 alpha at vertex {v}")
            extra += [Y.simplex_of(t) for t in tris]
        else:
            tris = ()
        exts.append(Extension(v, length, second, tris))
    return Gallery(opens, gal, gal | closure(extra), tuple(exts))
