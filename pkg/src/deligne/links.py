"""Vertex links of the modified Deligne complex and its coned-off version.

Links are angular metric graphs.  Links of vertices of type ``{s}`` and
``{s,t}`` are infinite, so they are built as finite balls; every cycle that
leaves a ball is covered by one of the analytic lower bounds recorded on the
graph, and :func:`certify_girth` checks both.
"""

from __future__ import annotations

import heapq
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Tuple

import networkx as nx

from .defining_graph import DefiningGraph
from .dihedral import DihedralGroup, GarsideElement
from .metric_synth import MetricParams

PI = math.pi
VERIFIED = "verified"
REFUTED = "refuted"


@dataclass(frozen=True)
class Truncation:
    radius: int
    center: str
    measure: str = "garside-length"


@dataclass(frozen=True)
class AnalyticCase:
    """A lower bound on the length of every cycle of a given kind."""

    name: str
    lower_bound: float


@dataclass
class MetricGraph:
    name: str
    nodes: Dict[str, str] = field(default_factory=dict)  # node -> type tag
    edges: List[Tuple[str, str, float]] = field(default_factory=list)
    truncation: Optional[Truncation] = None
    analytic_cases: List[AnalyticCase] = field(default_factory=list)
    meta: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    def add_node(self, node: str, tag: str, **meta) -> None:
        self.nodes.setdefault(node, tag)
        if meta:
            self.meta.setdefault(node, {}).update(meta)

    def add_edge(self, u: str, v: str, length: float) -> None:
        if not length > 0:
            raise ValueError(f"edge {u}--{v} must have positive length")
        if u not in self.nodes or v not in self.nodes:
            raise KeyError(f"edge {u}--{v} has an unknown endpoint")
        self.edges.append((u, v, float(length)))

    def copy(self, name: Optional[str] = None) -> "MetricGraph":
        return MetricGraph(
            name or self.name,
            dict(self.nodes),
            list(self.edges),
            self.truncation,
            list(self.analytic_cases),
            {k: dict(v) for k, v in self.meta.items()},
        )

    def to_nx(self) -> nx.MultiGraph:
        G = nx.MultiGraph()
        for node, tag in self.nodes.items():
            G.add_node(node, tag=tag)
        for u, v, w in self.edges:
            G.add_edge(u, v, length=w)
        return G

    def to_dot(self) -> str:
        lines = [f'graph "{self.name}" {{']
        for node, tag in self.nodes.items():
            lines.append(f'  "{node}" [tag="{tag}"];')
        for u, v, w in self.edges:
            lines.append(f'  "{u}" -- "{v}" [label="{w:.6g}", length={w!r}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class GirthCertificate:
    threshold: float
    status: str
    girth: float
    shortest_cycle: Optional[Tuple[str, ...]]
    method: str
    radius: Optional[int] = None
    analytic_cases: Tuple[Tuple[str, float, float], ...] = ()  # (name, bound, slack)

    @property
    def verified(self) -> bool:
        return self.status == VERIFIED


# --- girth -----------------------------------------------------------------------

def weighted_girth(graph: MetricGraph) -> Tuple[float, Optional[Tuple[str, ...]]]:
    """Shortest cycle length and one shortest cycle (math.inf, None if acyclic).

    For each edge uv the shortest cycle through it is uv plus the shortest
    u-v path avoiding it; searches are cut off at the best cycle found so far.
    """
    index = {node: i for i, node in enumerate(graph.nodes)}
    names = list(graph.nodes)
    adj: List[List[Tuple[int, float, int]]] = [[] for _ in names]
    for k, (u, v, w) in enumerate(graph.edges):
        if u == v:
            return w, (u,)
        adj[index[u]].append((index[v], w, k))
        adj[index[v]].append((index[u], w, k))

    best, best_cycle = math.inf, None
    order = sorted(range(len(graph.edges)), key=lambda k: graph.edges[k][2])
    for k in order:
        u, v, w = graph.edges[k]
        if w >= best:
            break
        src, dst = index[u], index[v]
        limit = best - w
        dist = {src: 0.0}
        parent = {src: None}
        heap = [(0.0, src)]
        done = set()
        while heap:
            d, x = heapq.heappop(heap)
            if x in done:
                continue
            if d >= limit:
                break
            done.add(x)
            if x == dst:
                best = d + w
                path = [x]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                best_cycle = tuple(names[i] for i in reversed(path))
                break
            for y, wy, ky in adj[x]:
                if ky == k:
                    continue
                nd = d + wy
                if nd < dist.get(y, math.inf):
                    dist[y] = nd
                    parent[y] = x
                    heapq.heappush(heap, (nd, y))
    return best, best_cycle


def cycle_length(graph: MetricGraph, cycle: Iterable[str]) -> float:
    """Length of a cycle given by its vertices, using the shortest parallel edges."""
    parallel: Dict[frozenset, List[float]] = defaultdict(list)
    for u, v, w in graph.edges:
        parallel[frozenset((u, v))].append(w)
    cycle = list(cycle)
    if len(cycle) == 2:
        return sum(sorted(parallel[frozenset(cycle)])[:2])
    lengths = {k: min(ws) for k, ws in parallel.items()}
    return sum(lengths[frozenset((cycle[i], cycle[(i + 1) % len(cycle)]))] for i in range(len(cycle)))


def certify_girth(graph: MetricGraph, threshold: float) -> GirthCertificate:
    girth, cycle = weighted_girth(graph)
    cases = tuple((c.name, c.lower_bound, c.lower_bound - threshold) for c in graph.analytic_cases)
    ok = girth >= threshold and all(slack >= 0 for _, _, slack in cases)
    if graph.truncation is not None:
        method = "exhaustive-within-ball+analytic-case"
    elif cases:
        method = "exhaustive+analytic-case"
    else:
        method = "exhaustive"
    return GirthCertificate(
        threshold=threshold,
        status=VERIFIED if ok else REFUTED,
        girth=girth,
        shortest_cycle=cycle,
        method=method,
        radius=graph.truncation.radius if graph.truncation else None,
        analytic_cases=cases,
    )


def link_threshold(p: MetricParams) -> float:
    """Girth needed for the curvature bound: 2 pi + eps (just 2 pi in the flat variant)."""
    return 2 * PI + p.epsilon


# --- links of Phi ------------------------------------------------------------------

def _pair_node(s: str, t: str) -> str:
    return f"{{{s},{t}}}"


def link_empty_type(g: DefiningGraph, p: MetricParams) -> MetricGraph:
    """Barycentric subdivision of the defining graph; each half of edge st has the apex angle for m_st."""
    L = MetricGraph("link(empty)")
    for s in g.generators:
        L.add_node(f"{{{s}}}", "{s}", generator=s)
    for s, t, m in g.finite_edges():
        mid = _pair_node(s, t)
        L.add_node(mid, "{s,t}", pair=(s, t), m=m)
        L.add_edge(f"{{{s}}}", mid, p.apex_angle(m))
        L.add_edge(mid, f"{{{t}}}", p.apex_angle(m))
    return L


def link_s_type(g: DefiningGraph, p: MetricParams, s: str, radius: int = 2) -> MetricGraph:
    """Complete bipartite ball: empty-type corners s^k (|k| <= radius) against one corner per finite-label neighbour."""
    if s not in g.generators:
        raise KeyError(s)
    L = MetricGraph(f"link({{{s}}})", truncation=Truncation(radius, f"{{{s}}}", "exponent"))
    length = PI / 2 + p.epsilon
    corners = []
    for t in g.neighbors(s):
        node = _pair_node(*sorted((s, t), key=g.index))
        L.add_node(node, "{s,t}", pair=tuple(sorted((s, t), key=g.index)), m=g.m(s, t))
        corners.append(node)
    for k in range(-radius, radius + 1):
        node = f"{s}^{k}" if k else "1"
        L.add_node(node, "empty", exponent=k)
        for c in corners:
            L.add_edge(node, c, length)
    # every cycle alternates sides, so it has at least four edges
    L.analytic_cases.append(AnalyticCase("bipartite: at least 4 edges", 4 * length))
    return L


def _dihedral(g: DefiningGraph, pair: Tuple[str, str]) -> DihedralGroup:
    s, t = sorted(pair, key=g.index)
    m = g.m(s, t)
    if m == math.inf:
        raise ValueError(f"pair {pair} has infinite label")
    return DihedralGroup(int(m), (s, t))


def coset_node(G: DihedralGroup, key: GarsideElement, side: str) -> str:
    return f"({G.format(key)})A_{side}"


def coset_graph(G: DihedralGroup, radius: int) -> nx.Graph:
    """Ball of D: vertices are cosets h A_s, h A_t; edges are elements h of Garside length <= radius."""
    s, t = G.names
    D = nx.Graph()
    for h in G.ball(radius):
        a, b = G.coset_key(h, s), G.coset_key(h, t)
        D.add_edge(("s", a), ("t", b), element=h)
    return D


def link_st_type(g: DefiningGraph, p: MetricParams, pair: Tuple[str, str], radius: int = 2) -> MetricGraph:
    """Barycentric subdivision of a ball of D; half-edges have length pi/2m + eps."""
    G = _dihedral(g, pair)
    s, t = G.names
    m = G.m
    half = PI / (2 * m) + p.epsilon
    L = MetricGraph(f"link({{{s},{t}}})", truncation=Truncation(radius, "1"))
    for h in sorted(G.ball(radius), key=lambda x: (x.garside_length, x.delta_power, x.factors)):
        mid = f"[{G.format(h)}]"
        L.add_node(mid, "empty", element=h)
        for side in (s, t):
            key = G.coset_key(h, side)
            node = coset_node(G, key, side)
            L.add_node(node, f"{{{side}}}", side=side, key=key, group=G)
            L.add_edge(node, mid, half)
    # cycles of D have at least 2m edges, i.e. 4m half-edges
    L.analytic_cases.append(AnalyticCase("D has girth 2m", 4 * m * half))
    return L


# --- coned-off links ------------------------------------------------------------------

def tree_key(G: DihedralGroup, side: str, key: GarsideElement) -> Tuple:
    """Identifier of the standard tree through the direction h A_side.

    Directions lie in the same tree iff they are related by a power of the
    central element z (and, for m odd, h A_s matches h Delta A_t).
    """
    s, t = G.names
    if G.m % 2 == 0:
        return (side, key.factors)
    if side == t:
        # h A_t corresponds to h Delta^-1 A_s
        key = G.mul_delta(key, -1)
        side = s
    return (s, key.delta_power % 2, key.factors)


def coned_link(base: MetricGraph, vertex_type: Tuple[str, ...], p: MetricParams) -> MetricGraph:
    eps = p.epsilon
    if len(vertex_type) == 1:
        L = base.copy(f"coned {base.name}")
        L.add_node("cone", "cone")
        for node, tag in base.nodes.items():
            if tag == "{s,t}":
                L.add_edge("cone", node, PI / 2)
        L.analytic_cases.append(AnalyticCase("single cone vertex", 2 * (PI / 2) + 2 * (PI / 2 + eps)))
        return L
    if len(vertex_type) == 2:
        L = base.copy(f"coned {base.name}")
        groups = [d["group"] for d in base.meta.values() if "group" in d]
        if not groups:
            raise ValueError("base graph carries no coset data")
        G = groups[0]
        m = G.m
        cone = p.table[m].cone_angle
        for node, data in list(base.meta.items()):
            if "key" not in data:
                continue
            tk = tree_key(G, data["side"], data["key"])
            cnode = "cone" + repr(tk).replace(" ", "")
            L.add_node(cnode, "cone", tree=tk)
            L.add_edge(cnode, node, cone)
        L.analytic_cases.extend([
            AnalyticCase("one cone vertex", 2 * (PI / 2 - eps) + (PI + 2 * m * eps)),
            AnalyticCase("two cone vertices", (2 * PI - 4 * eps) + 2 * (PI / m + 2 * eps)),
            AnalyticCase("three or more cone vertices", 3 * PI - 6 * eps),
        ])
        return L
    raise ValueError(f"unsupported vertex type {vertex_type!r}")


# --- all vertex types ------------------------------------------------------------------

@dataclass(frozen=True)
class LinkReport:
    vertex_type: Tuple[str, ...]
    plain: GirthCertificate
    coned: Optional[GirthCertificate]


def vertex_types(g: DefiningGraph) -> List[Tuple[str, ...]]:
    out: List[Tuple[str, ...]] = [()]
    out.extend((s,) for s in g.generators)
    out.extend((s, t) for s, t, _ in g.finite_edges())
    return out


def build_link(g: DefiningGraph, p: MetricParams, vertex_type: Tuple[str, ...], radius: int = 2) -> MetricGraph:
    if len(vertex_type) == 0:
        return link_empty_type(g, p)
    if len(vertex_type) == 1:
        return link_s_type(g, p, vertex_type[0], radius)
    return link_st_type(g, p, vertex_type, radius)


def certify_all(g: DefiningGraph, p: MetricParams, radius: int = 2, coned: bool = True) -> List[LinkReport]:
    threshold = link_threshold(p)
    out = []
    for vt in vertex_types(g):
        L = build_link(g, p, vt, radius)
        plain = certify_girth(L, threshold)
        cone = certify_girth(coned_link(L, vt, p), threshold) if coned and vt else None
        out.append(LinkReport(vt, plain, cone))
    return out
