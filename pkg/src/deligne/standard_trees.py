"""Standard trees: the cut graph of the fundamental domain and tree stabilisers.

The fixed tree of a generator r has stabiliser <r> x F with F free.  F is read
off the component of r in the cut graph: loops of the component give one kind
of free generator, and each pair vertex contributes a conjugate of its central
element.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import networkx as nx

from .defining_graph import DefiningGraph
from .dihedral import DihedralGroup, GarsideElement
from .words import Word, alternating

Node = Tuple

VERIFIED = "verified"
TRUSTED = "trusted-by-theorem"
TRIVIAL_INTERSECTION = "trivial-intersection"
EQUAL = "equal-with-witness"


def gen_node(s: str) -> Node:
    return ("gen", s)


def pair_node(s: str, t: str, copy: Optional[str] = None) -> Node:
    return ("pair", s, t, copy)


def node_name(node: Node) -> str:
    if node[0] == "gen":
        return "{%s}" % node[1]
    _, s, t, copy = node
    return "{%s,%s}" % (s, t) + ("" if copy is None else f"@{copy}")


@dataclass
class CutGraph:
    """Incidence graph of generator and pair vertices, possibly cut at even pairs.

    Edge attributes: ``source`` (the generator end, edges point from it to
    the pair end) and ``label`` (a Word, trivial or the pair's Delta).
    """

    defining: DefiningGraph
    graph: nx.Graph

    def node_key(self, node: Node) -> Tuple:
        g = self.defining
        if node[0] == "gen":
            return (0, g.index(node[1]))
        _, s, t, copy = node
        return (1, g.index(s), g.index(t), -1 if copy is None else g.index(copy))

    @property
    def nodes(self) -> List[Node]:
        return sorted(self.graph.nodes, key=self.node_key)

    def edges(self):
        out = []
        for u, v, data in self.graph.edges(data=True):
            src = data["source"]
            dst = v if src == u else u
            out.append((src, dst, data["label"]))
        return sorted(out, key=lambda e: (self.node_key(e[0]), self.node_key(e[1])))

    def components(self) -> List[List[Node]]:
        comps = [sorted(c, key=self.node_key) for c in nx.connected_components(self.graph)]
        return sorted(comps, key=lambda c: self.node_key(c[0]))

    def component_index(self) -> Dict[Node, int]:
        return {n: i for i, comp in enumerate(self.components()) for n in comp}

    def component_of(self, r: str) -> nx.Graph:
        return self.graph.subgraph(nx.node_connected_component(self.graph, gen_node(r)))

    def neighbors(self, node: Node) -> List[Node]:
        return sorted(self.graph.neighbors(node), key=self.node_key)

    def to_dot(self) -> str:
        idx = self.component_index()
        lines = ["graph cut_graph {"]
        for n in self.nodes:
            lines.append(f'  "{node_name(n)}" [component={idx[n]}];')
        for src, dst, label in self.edges():
            lines.append(f'  "{node_name(src)}" -- "{node_name(dst)}" [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def edge_label(g: DefiningGraph, s: str, t: str) -> Word:
    """Label of the edge from {s} to {s,t}."""
    m = g.m(s, t)
    if g.index(s) < g.index(t) and m % 2 == 1:
        return alternating(s, t, int(m))
    return Word(())


def fundamental_graph(g: DefiningGraph) -> CutGraph:
    """The uncut incidence graph of {s} and {s,t} vertices."""
    G = nx.Graph()
    for s in g.generators:
        G.add_node(gen_node(s))
    for s, t, _ in g.finite_edges():
        p = pair_node(s, t)
        for x, y in ((s, t), (t, s)):
            G.add_edge(gen_node(x), p, source=gen_node(x), label=edge_label(g, x, y))
    return CutGraph(g, G)


def cut(cg: CutGraph) -> CutGraph:
    """Split every even pair vertex into one copy per incident edge."""
    g = cg.defining
    G = nx.Graph()
    G.add_nodes_from(cg.graph.nodes)
    for u, v, data in cg.graph.edges(data=True):
        G.add_edge(u, v, **data)
    for node in list(G.nodes):
        if node[0] != "pair" or g.m(node[1], node[2]) % 2 == 1 or G.degree(node) <= 1:
            continue
        _, s, t, _ = node
        for nb in list(G.neighbors(node)):
            data = G.edges[node, nb]
            copy = pair_node(s, t, nb[1])
            G.add_edge(nb, copy, source=data["source"], label=data["label"])
        G.remove_node(node)
    return CutGraph(g, G)


def build_cut_graph(g: DefiningGraph) -> CutGraph:
    return cut(fundamental_graph(g))


@dataclass
class TreeStabiliserPresentation:
    center_generator: str
    free_basis: List[Word]
    kinds: List[str]
    commutation: List[str]
    rank: int
    loop_rank: int
    pair_vertices: int
    bounded: bool
    component: List[Node] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "center_generator": self.center_generator,
            "free_basis": [str(w) for w in self.free_basis],
            "kinds": self.kinds,
            "commutation": self.commutation,
            "rank": self.rank,
            "loop_rank": self.loop_rank,
            "pair_vertices": self.pair_vertices,
            "bounded": self.bounded,
            "bounded_criterion": "derived: no loops and at most one pair vertex",
            "component": [node_name(n) for n in self.component],
        }


def _dihedral_for(g: DefiningGraph, w: Word) -> Optional[DihedralGroup]:
    """The dihedral parabolic containing w, if w uses at most one finite pair."""
    gens = w.generators()
    if len(gens) != 2:
        return None
    s, t = sorted(gens, key=g.index)
    m = g.m(s, t)
    if m == float("inf"):
        return None
    return DihedralGroup(int(m), (s, t))


def _simplify(g: DefiningGraph, w: Word) -> Word:
    G = _dihedral_for(g, w)
    if G is None:
        return w
    x = G.normal_form(w)
    if x == G.center_generator():
        return G.center_word()
    return G.to_word(x)


def stabilizer_presentation(g: DefiningGraph, r: str, cg: Optional[CutGraph] = None) -> TreeStabiliserPresentation:
    if r not in g.generators:
        raise ValueError(f"{r!r} is not a generator")
    cg = cg or build_cut_graph(g)
    comp = cg.component_of(r)
    root = gen_node(r)

    # BFS spanning tree; path words read from the root
    path = {root: Word(())}
    tree_edges = set()
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in cg.neighbors(u):
            if v in path:
                continue
            data = cg.graph.edges[u, v]
            step = data["label"] if data["source"] == u else data["label"].inverse()
            path[v] = path[u] * step
            tree_edges.add(frozenset((u, v)))
            queue.append(v)

    basis, kinds = [], []
    for src, dst, label in cg.edges():
        if src in path and frozenset((src, dst)) not in tree_edges:
            basis.append(_simplify(g, path[src] * label * path[dst].inverse()))
            kinds.append("loop")
    pair_vertices = 0
    for node in sorted(comp.nodes, key=cg.node_key):
        if node[0] != "pair":
            continue
        pair_vertices += 1
        _, s, t, _ = node
        z = DihedralGroup(int(g.m(s, t)), (s, t)).center_word()
        w = path[node]
        basis.append(_simplify(g, w * z * w.inverse()))
        kinds.append("central")

    commutation = []
    for w in basis:
        G = _dihedral_for(g, w)
        if G is not None and r in G.names:
            if not G.commutes(w, Word(((r, 1),))):
                raise AssertionError(f"basis word {w} does not commute with {r}")
            commutation.append(VERIFIED)
        elif not w.syllables or w.generators() == {r}:
            commutation.append(VERIFIED)
        else:
            commutation.append(TRUSTED)

    loop_rank = comp.number_of_edges() - comp.number_of_nodes() + 1
    rank = loop_rank + pair_vertices
    assert rank == len(basis)
    return TreeStabiliserPresentation(
        center_generator=r,
        free_basis=basis,
        kinds=kinds,
        commutation=commutation,
        rank=rank,
        loop_rank=loop_rank,
        pair_vertices=pair_vertices,
        bounded=loop_rank == 0 and pair_vertices <= 1,
        component=sorted(comp.nodes, key=cg.node_key),
    )


# --- stabiliser dichotomy for coset edges ----------------------------------------------

@dataclass(frozen=True)
class DichotomyResult:
    kind: str
    witness: Optional[GarsideElement]
    z_bound: int

    @property
    def equal(self) -> bool:
        return self.kind == EQUAL


Element = Union[GarsideElement, Word, str]


def _element(G: DihedralGroup, h: Element) -> GarsideElement:
    if isinstance(h, GarsideElement):
        if h.m != G.m:
            raise ValueError(f"element of the m={h.m} group given to the m={G.m} group")
        return h
    return G.normal_form(h)


def check_stabilizer_dichotomy(G: DihedralGroup, e: Tuple[Element, str], e2: Tuple[Element, str]) -> DichotomyResult:
    """Decide Stab(h A_x) vs Stab(h' A_y) inside one dihedral Artin group.

    Each edge is given as (h, side).  The witness g satisfies e2 = g e (same
    sides) or h' A_y = g A_y with g in h Delta <z> (opposite sides).  The powers
    of z tried are exactly those allowed by the Garside length of h^-1 h',
    so the answer is exact; ``z_bound`` is the largest one tried.
    """
    (h, x), (h2, y) = e, e2
    for side in (x, y):
        if side not in G.names:
            raise ValueError(f"side {side!r} is not a generator of {G!r}")
    h, h2 = _element(G, h), _element(G, h2)
    if x != y and G.m % 2 == 0:
        return DichotomyResult(TRIVIAL_INTERSECTION, None, 0)
    z = G.center_generator()
    # z is central, so the same-side witness is z^k and the cross witness h Delta z^k;
    # either way we need base^-1 h' in z^k A_y
    base = h if x == y else G.mul_delta(h, 1)
    q = G.mul(G.inverse(base), h2)
    powers = _candidate_powers(q, z.delta_power)
    bound = max((abs(k) for k in powers), default=0)
    for k in powers:
        if G.in_cyclic(G.mul(_power(G, z, -k), q), y):
            g = _power(G, z, k) if x == y else G.mul(base, _power(G, z, k))
            return DichotomyResult(EQUAL, g, bound)
    return DichotomyResult(TRIVIAL_INTERSECTION, None, bound)


def _candidate_powers(q: GarsideElement, step: int) -> List[int]:
    # Delta^(k step) y^j has inf <= k step <= sup, so only this window can work
    lo, hi = q.inf // step - 1, -(-q.sup // step) + 1
    return sorted(range(lo, hi + 1), key=lambda k: (abs(k), k))


def _power(G: DihedralGroup, x: GarsideElement, k: int) -> GarsideElement:
    # x is a power of Delta here, so powers stay factor-free
    return G.delta(x.delta_power * k)
