"""Defining graphs of Artin groups: parsing, canonical serialization, classification.

Document format (JSON)::

    {
      "generators": ["s", "t", "r"],
      "relations": [
        {"pair": ["s", "t"], "m": 4},
        {"pair": ["t", "r"], "m": 2}
      ]
    }

Pairs that are not listed carry the label infinity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple, Union

import networkx as nx

Label = Union[int, float]  # float only ever means math.inf
INF = math.inf


class ParseError(ValueError):
    """Raised when a graph document is malformed or violates an invariant."""


@dataclass(frozen=True)
class DefiningGraph:
    generators: Tuple[str, ...]
    labels: Dict[FrozenSet[str], int] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if len(set(gens)) != len(gens):
            raise ParseError("duplicate generator")
        for pair, m in self.labels.items():
            if len(pair) != 2:
                raise ParseError(f"self-label or malformed pair: {sorted(pair)}")
            if not pair <= set(gens):
                raise ParseError(f"relation mentions unknown generator: {sorted(pair)}")
            if not isinstance(m, int) or isinstance(m, bool) or m < 2:
                raise ParseError(f"label must be an integer >= 2, got {m!r}")

    def index(self, s: str) -> int:
        return self.generators.index(s)

    def m(self, s: str, t: str) -> Label:
        if s == t:
            raise ValueError("m_ss is not part of the data")
        return self.labels.get(frozenset((s, t)), INF)

    def finite_edges(self) -> List[Tuple[str, str, int]]:
        """Finite-label edges (s, t, m) with s before t in generator order."""
        out = []
        for s, t in combinations(self.generators, 2):
            m = self.labels.get(frozenset((s, t)))
            if m is not None:
                out.append((s, t, m))
        return out

    def neighbors(self, s: str) -> List[str]:
        return [t for t in self.generators if t != s and frozenset((s, t)) in self.labels]

    def finite_labels(self) -> List[int]:
        return sorted(set(self.labels.values()))

    def relabel(self, mapping: Dict[str, str], order: Optional[Iterable[str]] = None) -> "DefiningGraph":
        gens = tuple(order) if order is not None else tuple(mapping[s] for s in self.generators)
        labels = {frozenset(mapping[x] for x in pair): m for pair, m in self.labels.items()}
        return DefiningGraph(gens, labels)

    def to_nx(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(self.generators)
        for s, t, m in self.finite_edges():
            G.add_edge(s, t, m=m)
        return G


def _reciprocal(m: Label) -> Fraction:
    return Fraction(0) if m == INF else Fraction(1, int(m))


def parse(text: str) -> DefiningGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed document: {exc}") from exc
    return from_dict(doc)


def from_dict(doc) -> DefiningGraph:
    if not isinstance(doc, dict) or "generators" not in doc:
        raise ParseError("document must be an object with a 'generators' field")
    extra = set(doc) - {"generators", "relations"}
    if extra:
        raise ParseError(f"unknown fields: {sorted(extra)}")
    gens = doc["generators"]
    if not isinstance(gens, list) or not all(isinstance(g, str) and g for g in gens):
        raise ParseError("'generators' must be a list of non-empty strings")
    if len(set(gens)) != len(gens):
        raise ParseError("duplicate generator")
    known = set(gens)

    labels: Dict[FrozenSet[str], int] = {}
    rels = doc.get("relations", [])
    if not isinstance(rels, list):
        raise ParseError("'relations' must be a list")
    for rec in rels:
        if not isinstance(rec, dict) or set(rec) != {"pair", "m"}:
            raise ParseError(f"relation must have exactly 'pair' and 'm': {rec!r}")
        pair, m = rec["pair"], rec["m"]
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(x, str) for x in pair)):
            raise ParseError(f"'pair' must list two generator names: {pair!r}")
        a, b = pair
        if a == b:
            raise ParseError(f"self-label on {a!r}")
        if a not in known or b not in known:
            raise ParseError(f"unknown generator in pair {pair!r}")
        if isinstance(m, bool) or not isinstance(m, int):
            raise ParseError(f"label must be an integer, got {m!r}")
        if m < 2:
            raise ParseError(f"label below 2 on {pair!r}")
        key = frozenset(pair)
        if key in labels and labels[key] != m:
            raise ParseError(f"asymmetric label on {sorted(key)}: {labels[key]} vs {m}")
        labels[key] = m
    return DefiningGraph(tuple(gens), labels)


def to_dict(g: DefiningGraph) -> dict:
    return {
        "generators": list(g.generators),
        "relations": [{"pair": [s, t], "m": m} for s, t, m in g.finite_edges()],
    }


def serialize(g: DefiningGraph) -> str:
    return json.dumps(to_dict(g), indent=2) + "\n"


def load(path) -> DefiningGraph:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


@dataclass(frozen=True)
class Classification:
    two_dimensional: bool
    hyperbolic_type: bool
    irreducible: bool
    dimension_witness: Optional[Tuple[str, str, str]] = None
    hyperbolic_witness: Optional[Tuple[str, str, str]] = None
    reducibility_witness: Optional[Tuple[Tuple[str, ...], Tuple[str, ...]]] = None

    @property
    def witness(self):
        """First witness for a failing flag, in the order dimension, hyperbolicity, irreducibility."""
        return self.dimension_witness or self.hyperbolic_witness or self.reducibility_witness


def triples(g: DefiningGraph) -> Iterator[Tuple[Tuple[str, str, str], Fraction]]:
    for s, t, r in combinations(g.generators, 3):
        yield (s, t, r), _reciprocal(g.m(s, t)) + _reciprocal(g.m(t, r)) + _reciprocal(g.m(s, r))


def classify(g: DefiningGraph) -> Classification:
    dim_w = hyp_w = None
    for triple, total in triples(g):
        if dim_w is None and total > 1:
            dim_w = triple
        if hyp_w is None and total >= 1:
            hyp_w = triple

    # irreducible: connected once we join every pair whose label is not 2
    G = nx.Graph()
    G.add_nodes_from(g.generators)
    G.add_edges_from((s, t) for s, t in combinations(g.generators, 2) if g.m(s, t) != 2)
    red_w = None
    if g.generators and not nx.is_connected(G):
        first = nx.node_connected_component(G, g.generators[0])
        red_w = (
            tuple(s for s in g.generators if s in first),
            tuple(s for s in g.generators if s not in first),
        )
    return Classification(
        two_dimensional=dim_w is None,
        hyperbolic_type=hyp_w is None,
        irreducible=red_w is None,
        dimension_witness=dim_w,
        hyperbolic_witness=hyp_w,
        reducibility_witness=red_w,
    )
