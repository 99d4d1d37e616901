"""Gallery-stability trials, fellow-travelling lengths and acylindricity constants."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .complex import PHComplex, Point, Simplex
from .cover import Cover, CoverError, Decomposition, decompose
from .galleries import Gallery, extended_gallery
from .paths import Geodesic, geodesic, random_point, shoot


class NotAcuteError(ValueError):
    pass


@dataclass(frozen=True)
class StabilityResult:
    passed: bool
    offending: Tuple[Simplex, ...]


def stability_test(Y: PHComplex, g: Geodesic, g2: Geodesic, alpha: float,
                   gallery: Optional[Gallery] = None) -> StabilityResult:
    """Check that every open simplex of Gal(g2) off the carriers of its endpoints lies in Gal*(g)."""
    acute, witness = Y.is_acute()
    if not acute:
        raise NotAcuteError(f"triangle {witness[0]} has angle {witness[2]} at vertex {witness[1]}")
    gallery = gallery or extended_gallery(Y, g, alpha)
    sx, sy = Y.support(g2.x), Y.support(g2.y)
    bad = [rho for rho in g2.gallery() if not (rho <= sx or rho <= sy) and rho not in gallery.extended]
    return StabilityResult(not bad, tuple(sorted(bad, key=sorted)))


def _outside_carriers(Y: PHComplex, g2: Geodesic) -> int:
    sx, sy = Y.support(g2.x), Y.support(g2.y)
    return sum(1 for rho in g2.gallery() if not (rho <= sx or rho <= sy))


@dataclass
class TrialRecord:
    trial: int
    kind: str
    status: str  # "pass", "fail" or "skipped"
    length: float = 0.0
    k: Optional[int] = None
    offending: List[List[int]] = field(default_factory=list)
    reason: str = ""
    bends: int = 0
    outside_carriers: int = 0  # simplices of Gal(g') off the endpoint carriers: what the check constrains


@dataclass
class TrialReport:
    seed: int
    trials: int
    perturbation: float
    passed: int
    failed: int
    skipped: int
    records: List[TrialRecord]

    def to_dict(self, records: bool = True) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "records"}
        if records:
            d["records"] = [asdict(r) for r in self.records]
        else:
            d["failures"] = [asdict(r) for r in self.records if r.status == "fail"]
        return d


def core_point(Y: PHComplex, cover: Cover, rng: np.random.Generator, near: Optional[int] = None,
               tries: int = 1000) -> Point:
    """A random point lying only in the cover set of its triangle (optionally in the star of ``near``)."""
    for _ in range(tries):
        if near is None:
            p = random_point(Y, rng)
        else:
            r = cover.r_vertex + (0.8 - cover.r_vertex) * rng.random()
            t = int(rng.choice(Y.vertex_triangles[near]))
            corner = Point.at(t, [1.0 if u == near else 0.0 for u in Y.triangles[t]])
            p, _ = shoot(Y, corner, rng.random() * 2 * math.pi, r, rng)
        if cover.members(p) == [Y.simplex_of(p.triangle)]:
            return p
    raise RuntimeError("no core point found")


def _endpoints(Y: PHComplex, cover: Cover, kind: str, rng: np.random.Generator) -> Tuple[Point, Point]:
    """Core points in two different triangles."""
    # threading: both ends in the star of one vertex, so the geodesic often passes through it
    v = int(rng.choice([u for u in Y.vertices if len(Y.vertex_triangles[u]) > 2])) if kind == "threading" else None
    x = core_point(Y, cover, rng, v)
    while True:
        y = core_point(Y, cover, rng, v)
        if y.triangle != x.triangle:
            return x, y


def _anchored_segment(cover: Cover, g: Geodesic):
    """An anchored geodesic obtained from ``g`` with its decomposition, or a reason to skip.

    Either ``g`` itself, or the inner segment x_1 x_k, whose decomposition
    Sigma_1 .. Sigma_k is ``g``'s without the two end sets.
    """
    D = decompose(cover, g)
    if D.is_anchored():
        return g, D, ""
    inner = D.inner()
    if inner is None:
        return None, D, "decomposition too short for an inner segment"
    a, b = inner
    if b - a <= 0:
        return None, D, "degenerate inner segment"
    kept = Decomposition(D.simplices[1:-1], tuple(p - a for p in D.positions[1:-1]), b - a)
    if not kept.is_anchored():
        return None, kept, "inner segment not anchored"
    return g.subsegment(a, b), kept, ""


def run_stability_trials(Y: PHComplex, cover: Cover, trials: int, seed: int = 0,
                         perturbation: float = 1.0) -> TrialReport:
    """Seeded trials of the stability lemma; endpoints move by less than ``perturbation * eps``.

    Trials alternate between random geodesics and geodesics threading a
    vertex.  Each trial uses its own generator, derived from ``seed`` and the
    trial index, so records do not depend on execution order.
    """
    k = cover.k
    records = []
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        kind = "threading" if i % 2 else "random"
        x, y = _endpoints(Y, cover, kind, rng)
        g = geodesic(Y, x, y)
        try:
            h, D, reason = _anchored_segment(cover, g)
        except CoverError as exc:
            records.append(TrialRecord(i, kind, "skipped", g.length, reason=str(exc)))
            continue
        if h is None:
            records.append(TrialRecord(i, kind, "skipped", g.length, D.k, reason=reason))
            continue
        eps = k.epsilon * perturbation
        x2, _ = shoot(Y, h.x, rng.random() * 2 * math.pi, eps * rng.random() * (1 - 1e-9), rng)
        y2, _ = shoot(Y, h.y, rng.random() * 2 * math.pi, eps * rng.random() * (1 - 1e-9), rng)
        g2 = geodesic(Y, x2, y2)
        res = stability_test(Y, h, g2, k.alpha)
        records.append(TrialRecord(i, kind, "pass" if res.passed else "fail", h.length, D.k,
                                   [sorted(s) for s in res.offending], bends=len(h.bend_vertices()),
                                   outside_carriers=_outside_carriers(Y, g2)))
    count = {s: sum(1 for r in records if r.status == s) for s in ("pass", "fail", "skipped")}
    return TrialReport(seed, trials, perturbation, count["pass"], count["fail"], count["skipped"], records)


# --- fellow travelling and acylindricity ----------------------------------------------------

@dataclass(frozen=True)
class FellowTravel:
    r: float
    epsilon: float
    length: float
    method: str


def _moved(d: float, r: float, thetas: np.ndarray) -> np.ndarray:
    """Points at distance r from the point at signed distance d along the x-axis of H^2 (columns)."""
    c = np.array([math.sinh(d), 0.0, math.cosh(d)])
    along = np.array([math.cosh(d), 0.0, math.sinh(d)])
    across = np.array([0.0, 1.0, 0.0])
    u = np.outer(along, np.cos(thetas)) + np.outer(across, np.sin(thetas))
    return math.cosh(r) * c[:, None] + math.sinh(r) * u


def _dist_from_origin(X: np.ndarray) -> np.ndarray:
    return np.arccosh(np.maximum(X[2], 1.0))


def _worst_gap(r: float, l: float, D: float, angles: int, iters: int = 60) -> float:
    """Largest distance from gamma(l) to x'y' over endpoint moves of size r, |gamma| = D, in H^2.

    gamma(l) is placed at the origin.  The distance to x'y' is a convex
    function of the endpoints, so the worst case lies on the circles of
    radius r; the distance along the segment is convex too (ternary search).
    """
    th = np.linspace(0.0, 2 * math.pi, angles, endpoint=False)
    A = np.repeat(_moved(-l, r, th), angles, axis=1)
    B = np.tile(_moved(D - l, r, th), angles)
    dab = np.arccosh(np.maximum(-(A[0] * B[0] + A[1] * B[1] - A[2] * B[2]), 1.0))
    safe = np.where(dab > 1e-12, dab, 1.0)

    def at(s):
        wa = np.where(dab > 1e-12, np.sinh((1 - s) * dab) / np.sinh(safe), 1 - s)
        wb = np.where(dab > 1e-12, np.sinh(s * dab) / np.sinh(safe), s)
        return _dist_from_origin(wa * A + wb * B)

    lo, hi = np.zeros(A.shape[1]), np.ones(A.shape[1])
    for _ in range(iters):
        m1, m2 = lo + (hi - lo) / 3, hi - (hi - lo) / 3
        left = at(m1) < at(m2)
        hi = np.where(left, m2, hi)
        lo = np.where(left, lo, m1)
    return float(at((lo + hi) / 2).max())


def fellow_travel_length(r: float, eps: float, angles: int = 32, extra: Tuple[float, ...] = (0.0, 2.0, 8.0)) -> FellowTravel:
    """Smallest l (by bisection) such that points of xy at distance >= l from both ends lie within
    eps of x'y' whenever d(x, x'), d(y, y') <= r, over sampled configurations in H^2."""
    if r < eps or eps <= 0:
        raise ValueError("need r >= eps > 0")

    def ok(l):
        return all(_worst_gap(r, l, 2 * l + e, angles) <= eps for e in extra)

    lo, hi = 0.0, 1.0
    while not ok(hi):
        lo, hi = hi, 2 * hi
    for _ in range(40):
        mid = (lo + hi) / 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return FellowTravel(r, eps, hi, f"bisection over {angles}x{angles} endpoint directions in H^2, |gamma| = 2l + {list(extra)}")


@dataclass(frozen=True)
class AcylConstants:
    L: float
    C_prime: float
    N: Optional[int]
    log10_N: float
    overflow: bool
    inputs: Dict[str, float]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["N"] = str(self.N) if self.N is not None else "overflow"
        return d


MAX_DIGITS = 300


def acyl_constants(r: float, L0: float, N0: int, l_ft: float, B: float, C: float) -> AcylConstants:
    """L = L0 + 4B + 2 l_ft, C' = (L0 + 4B + 2r) C and N = N0 * ceil(C')!."""
    for name, v in (("r", r), ("L0", L0), ("l_ft", l_ft)):
        if v < 0:
            raise ValueError(f"{name} must be non-negative")
    for name, v in (("N0", N0), ("B", B), ("C", C)):
        if v <= 0:
            raise ValueError(f"{name} must be positive")
    L = L0 + 4 * B + 2 * l_ft
    Cp = (L0 + 4 * B + 2 * r) * C
    n = math.ceil(Cp)
    log10 = math.log10(N0) + math.lgamma(n + 1) / math.log(10)
    if log10 > MAX_DIGITS:
        N, overflow = None, True
    else:
        N, overflow = int(N0) * math.factorial(n), False
    return AcylConstants(L, Cp, N, log10, overflow, {"r": r, "L0": L0, "N0": N0, "l_ft": l_ft, "B": B, "C": C})


def all_pairs_vertex_distances(Y: PHComplex) -> Dict[Tuple[int, int], float]:
    import networkx as nx

    G = nx.Graph()
    for v, legs in Y.vertex_legs.items():
        for w, leg in legs.items():
            if not G.has_edge(v, w) or G[v][w]["w"] > leg.length:
                G.add_edge(v, w, w=leg.length)
    return {(v, w): d for v, row in nx.all_pairs_dijkstra_path_length(G, weight="w") for w, d in row.items()}


def star_bound(Y: PHComplex) -> float:
    """B: the largest distance between two vertices of one closed vertex star.

    Closed stars are convex hulls of their vertices in the acute case, so this
    bounds the length of any geodesic inside a star.
    """
    dist = all_pairs_vertex_distances(Y)
    best = 0.0
    for v in Y.vertices:
        verts = sorted({u for t in Y.vertex_triangles[v] for u in Y.triangles[t]})
        best = max(best, max(dist[(a, b)] for a in verts for b in verts))
    return best


def gallery_constant(Y: PHComplex, alpha: float, samples: int = 200, seed: int = 0) -> float:
    """C measured as max #vertices(Gal*) / max(|gamma|, 1) over sampled geodesics (not a proof)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        g = geodesic(Y, random_point(Y, rng), random_point(Y, rng))
        gal = extended_gallery(Y, g, alpha)
        worst = max(worst, gal.vertex_count() / max(g.length, 1.0))
    return worst
