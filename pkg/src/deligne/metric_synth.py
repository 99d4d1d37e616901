"""Metric parameters for the piecewise hyperbolic (or flat) modified Deligne complex."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import networkx as nx

from .defining_graph import DefiningGraph, classify
from .hyp_trig import (
    EuclideanTriangleShape,
    HypTriangleShape,
    euclidean_from_angles,
    right_triangle,
    right_triangle_leg_angle,
    solve_angle_angle_side,
)

PI = math.pi
CYCLE_LENGTH_CAP = 12
ELL_SLACK = 1e-12
MAX_BISECTION_STEPS = 200

HYPERBOLIC = "hyperbolic"
MOUSSONG = "moussong"


class NotHyperbolicType(ValueError):
    pass


class ClassificationMismatch(ValueError):
    pass


class ConvergenceError(ArithmeticError):
    pass


def theta(m: float, eps: float) -> float:
    """Apex angle target for label m: (m - 1) pi / 2m - 2 eps (pi/2 - 2 eps when m is infinite)."""
    if m == math.inf:
        return PI / 2 - 2 * eps
    return (m - 1) * PI / (2 * m) - 2 * eps


@dataclass(frozen=True)
class Bound:
    name: str
    source: str
    limit: float  # constraint reads eps <= limit

    def slack(self, eps: float) -> float:
        return self.limit - eps


@dataclass(frozen=True)
class EpsilonCertificate:
    epsilon: float
    bounds: Tuple[Bound, ...]
    cycle_checks: Tuple[Tuple[Tuple[str, ...], float], ...] = ()
    cycle_cap: int = CYCLE_LENGTH_CAP

    @property
    def binding(self) -> Bound:
        return min(self.bounds, key=lambda b: b.limit)

    def slacks(self, eps: Optional[float] = None) -> Dict[str, float]:
        e = self.epsilon if eps is None else eps
        return {b.name: b.slack(e) for b in self.bounds}

    def violated(self, eps: float) -> List[str]:
        """Bounds not strictly satisfied at ``eps``."""
        return [b.name for b in self.bounds if b.slack(eps) <= 0]


def closed_form_bounds(labels) -> List[Bound]:
    bounds = [
        # minimal triangle groups: 24 eps / pi must stay below the reciprocal-sum gap
        Bound("triangle(2,3,7)", "24 eps <= pi (1 - 1/2 - 1/3 - 1/7)", PI / 1008),
        Bound("triangle(2,4,5)", "24 eps <= pi (1 - 1/2 - 1/4 - 1/5)", PI / 480),
        Bound("triangle(3,3,4)", "24 eps <= pi (1 - 1/3 - 1/3 - 1/4)", PI / 288),
        Bound("four-cycle", "(8 + 4 + 1) eps <= pi / 12", PI / 156),
        Bound("long-cycle", "(10 + 5 + 1) eps <= pi / 4", PI / 64),
        Bound("right-angle-room(m=2)", "(pi/2 + eps) + (pi/4 + eps) <= pi - eps", PI / 12),
        Bound("coned-three-vertices", "3 pi - 6 eps >= 2 pi + eps", PI / 7),
    ]
    for m in sorted(set(labels)):
        bounds.append(Bound(f"coned-two-vertices(m={m})", f"2 pi + 2 pi/{m} >= 2 pi + eps", 2 * PI / m))
    return bounds


def cycle_sums(g: DefiningGraph, eps: float, cap: int = CYCLE_LENGTH_CAP):
    """For each simple cycle of length <= cap, sum(theta(m_i, eps) - eps) - (pi + eps)."""
    G = g.to_nx()
    out = []
    for cyc in nx.simple_cycles(G, length_bound=cap):
        if len(cyc) < 3:
            continue
        total = 0.0
        for i, s in enumerate(cyc):
            t = cyc[(i + 1) % len(cyc)]
            total += theta(g.m(s, t), eps) - eps
        out.append((tuple(cyc), total - (PI + eps)))
    out.sort()
    return out


def synthesize_epsilon(g: DefiningGraph) -> Tuple[float, EpsilonCertificate]:
    if not classify(g).hyperbolic_type:
        raise NotHyperbolicType("graph is not of hyperbolic type")
    bounds = closed_form_bounds(g.finite_labels())
    eps = min(b.limit for b in bounds) / 2
    cycles = cycle_sums(g, eps)
    bad = [c for c, slack in cycles if slack < 0]
    if bad:
        raise NotHyperbolicType(f"cycle {bad[0]} fails the angle-sum check")
    return eps, EpsilonCertificate(eps, tuple(bounds), tuple(cycles))


# --- triangle shapes ---------------------------------------------------------

def fundamental_shape(m: int, ell: float, eps: float) -> HypTriangleShape:
    """Angles (apex v, right-ish angle at v', small angle at v''), |vv'| = ell."""
    return solve_angle_angle_side(PI / 2 + eps, PI / (2 * m) + eps, ell)


def cone_angle(d: float) -> float:
    """Angle at v'' of the right cone triangle with legs 1 (at the cone) and d."""
    return right_triangle_leg_angle(1.0, d)


def ell_slacks(labels, ell: float, eps: float) -> Dict[int, Tuple[float, float]]:
    """Per-label (eps - area, cone_angle - (pi/2 - eps))."""
    out = {}
    for m in labels:
        shape = fundamental_shape(m, ell, eps)
        out[m] = (eps - shape.area, cone_angle(shape.sides[0]) - (PI / 2 - eps))
    return out


def ell_feasible(labels, ell: float, eps: float) -> bool:
    return all(a >= ELL_SLACK and b >= ELL_SLACK for a, b in ell_slacks(labels, ell, eps).values())


def _round_down_sig(x: float, digits: int = 3) -> float:
    exponent = math.floor(math.log10(x)) - (digits - 1)
    scale = 10.0 ** exponent
    return math.floor(x / scale) * scale


def synthesize_ell(g: DefiningGraph, epsilon: float) -> float:
    labels = g.finite_labels()
    if not labels:
        return 1.0
    lo, steps = 1.0, 0
    while not ell_feasible(labels, lo, epsilon):
        lo /= 2
        steps += 1
        if steps > MAX_BISECTION_STEPS:
            raise ConvergenceError("no feasible edge length found")
    if steps == 0:
        return 1.0
    hi = 2 * lo
    # refine until the bracket pins 3 significant digits
    while hi - lo > 10.0 ** (math.floor(math.log10(lo)) - 3):
        mid = (lo + hi) / 2
        if ell_feasible(labels, mid, epsilon):
            lo = mid
        else:
            hi = mid
        steps += 1
        if steps > MAX_BISECTION_STEPS:
            raise ConvergenceError("bisection did not converge")
    ell = _round_down_sig(lo)
    if not ell_feasible(labels, ell, epsilon):
        raise ConvergenceError("rounded edge length lost feasibility")
    return ell


# --- parameters --------------------------------------------------------------

@dataclass(frozen=True)
class LabelData:
    m: int
    theta: float
    shape: Union[HypTriangleShape, EuclideanTriangleShape]
    d: float
    cone_angle: Optional[float]
    cone_shape: Optional[HypTriangleShape]

    @property
    def apex_angle(self) -> float:
        return self.shape.angles[0]


@dataclass(frozen=True)
class MetricParams:
    epsilon: float
    ell: float
    mode: str
    table: Dict[int, LabelData] = field(hash=False)
    certificate: Optional[EpsilonCertificate] = field(default=None, hash=False)

    def apex_angle(self, m: float) -> float:
        """Angle at the empty-type vertex of the triangle for label m."""
        return self.table[m].apex_angle

    def spade_slack(self, m: int) -> float:
        return (PI - self.epsilon) - (PI / 2 + self.epsilon) - (PI / (2 * m) + self.epsilon)

    def invariant_violations(self) -> List[str]:
        bad = []
        for m, row in self.table.items():
            if self.mode == MOUSSONG:
                continue
            if self.spade_slack(m) < 0:
                bad.append(f"m={m}: right-angle room")
            if row.shape.area > self.epsilon:
                bad.append(f"m={m}: area exceeds epsilon")
            if row.cone_angle < PI / 2 - self.epsilon:
                bad.append(f"m={m}: cone angle too small")
            if abs(row.shape.sides[2] - self.ell) > 1e-12:
                bad.append(f"m={m}: shared edge length differs")
        return bad


def build_params(g: DefiningGraph, mode: str = HYPERBOLIC) -> MetricParams:
    cls = classify(g)
    if mode == HYPERBOLIC:
        if not cls.hyperbolic_type:
            raise ClassificationMismatch("hyperbolic mode needs a graph of hyperbolic type")
        eps, cert = synthesize_epsilon(g)
        ell = synthesize_ell(g, eps)
        table = {}
        for m in g.finite_labels():
            shape = fundamental_shape(m, ell, eps)
            d = shape.sides[0]
            table[m] = LabelData(m, theta(m, eps), shape, d, cone_angle(d), right_triangle(1.0, d))
        return MetricParams(eps, ell, mode, table, cert)
    if mode == MOUSSONG:
        if not cls.two_dimensional:
            raise ClassificationMismatch("Moussong mode needs a two-dimensional graph")
        table = {}
        for m in g.finite_labels():
            angles = (theta(m, 0.0), PI / 2, PI / (2 * m))
            shape = euclidean_from_angles(angles, 2, 1.0)
            table[m] = LabelData(m, theta(m, 0.0), shape, shape.sides[0], None, None)
        return MetricParams(0.0, 1.0, mode, table, None)
    raise ValueError(f"unknown mode {mode!r}")
