"""Hyperbolic plane trigonometry on the hyperboloid model.

Triangles are described by three angles and three sides with side ``i``
opposite angle ``i``.  For the fundamental triangle ``v v' v''`` the angle
order is ``(v, v', v'')``, so side 0 is ``|v'v''|`` and side 2 is ``|vv'|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

IDENTITY_TOL = 1e-9
ROUNDTRIP_TOL = 1e-8
ACOSH_CLAMP = 1e-12


class NoSolutionError(ArithmeticError):
    """No hyperbolic triangle matches the requested data."""


class GluingError(ValueError):
    """Edges glued in a development have different lengths."""


def safe_acosh(x: float) -> float:
    if x < 1.0:
        if x < 1.0 - ACOSH_CLAMP:
            raise ValueError(f"acosh argument {x!r} below 1")
        return 0.0
    return math.acosh(x)


def _safe_acos(x: float) -> float:
    return math.acos(min(1.0, max(-1.0, x)))


@dataclass(frozen=True)
class HypTriangleShape:
    angles: Tuple[float, float, float]
    sides: Tuple[float, float, float]
    area: float

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        object.__setattr__(self, "sides", tuple(float(x) for x in self.sides))

    def law_of_cosines_residuals(self) -> List[float]:
        """|cos C - (-cos A cos B + sin A sin B cosh c)| for each choice of C."""
        out = []
        for k in range(3):
            i, j = (k + 1) % 3, (k + 2) % 3
            A, B, C = self.angles[i], self.angles[j], self.angles[k]
            rhs = -math.cos(A) * math.cos(B) + math.sin(A) * math.sin(B) * math.cosh(self.sides[k])
            out.append(abs(math.cos(C) - rhs))
        return out

    def check(self, tol: float = IDENTITY_TOL) -> None:
        if not all(0 < a < math.pi for a in self.angles):
            raise ValueError(f"angles out of range: {self.angles}")
        if not all(x > 0 for x in self.sides):
            raise ValueError(f"non-positive side: {self.sides}")
        if sum(self.angles) >= math.pi:
            raise ValueError("angle sum must be below pi")
        if abs(self.area - (math.pi - sum(self.angles))) > tol:
            raise ValueError("area does not match the angle defect")
        if max(self.law_of_cosines_residuals()) > tol:
            raise ValueError("law of cosines violated")


@dataclass(frozen=True)
class EuclideanTriangleShape:
    """Flat triangle, used for the epsilon = 0 variant."""

    angles: Tuple[float, float, float]
    sides: Tuple[float, float, float]
    area: float = 0.0

    def check(self, tol: float = 1e-12) -> None:
        if abs(sum(self.angles) - math.pi) > tol:
            raise ValueError("Euclidean angle sum must be pi")
        for k in range(3):
            ratio = self.sides[k] / math.sin(self.angles[k])
            if abs(ratio - self.sides[0] / math.sin(self.angles[0])) > 1e-9 * ratio:
                raise ValueError("law of sines violated")


def euclidean_from_angles(angles: Sequence[float], side_index: int, length: float) -> EuclideanTriangleShape:
    scale = length / math.sin(angles[side_index])
    return EuclideanTriangleShape(tuple(angles), tuple(scale * math.sin(a) for a in angles), 0.0)


def sides_from_angles(angles: Sequence[float]) -> Tuple[float, float, float]:
    """Law of cosines for angles, solved for each side."""
    out = []
    for k in range(3):
        A, B, C = angles[(k + 1) % 3], angles[(k + 2) % 3], angles[k]
        out.append(safe_acosh((math.cos(C) + math.cos(A) * math.cos(B)) / (math.sin(A) * math.sin(B))))
    return tuple(out)


def from_angles(angles: Sequence[float]) -> HypTriangleShape:
    angles = tuple(float(a) for a in angles)
    if sum(angles) >= math.pi:
        raise NoSolutionError("angle sum must be below pi")
    return HypTriangleShape(angles, sides_from_angles(angles), math.pi - sum(angles))


def solve_sss(a: float, b: float, c: float) -> HypTriangleShape:
    sides = (float(a), float(b), float(c))
    if min(sides) <= 0:
        raise ValueError("sides must be positive")
    if not (a < b + c and b < a + c and c < a + b):
        raise NoSolutionError("triangle inequality fails")
    angles = []
    for k in range(3):
        x, y, z = sides[k], sides[(k + 1) % 3], sides[(k + 2) % 3]
        num = math.cosh(y) * math.cosh(z) - math.cosh(x)
        angles.append(_safe_acos(num / (math.sinh(y) * math.sinh(z))))
    return HypTriangleShape(tuple(angles), sides, math.pi - sum(angles))


def solve_angle_angle_side(beta: float, gamma: float, c: float) -> HypTriangleShape:
    """Triangle with angle ``beta`` at v', ``gamma`` at v'' and ``|vv'| = c``.

    The apex angle alpha solves ``cos(gamma) = A sin(alpha) - B cos(alpha)``
    with ``A = sin(beta) cosh(c)`` and ``B = cos(beta)``; writing the right
    side as ``R sin(alpha - phi)`` gives it in closed form.
    """
    if not (0 < beta < math.pi and 0 < gamma < math.pi and beta + gamma < math.pi):
        raise ValueError("need beta, gamma in (0, pi) with beta + gamma < pi")
    if c <= 0:
        raise ValueError("side must be positive")
    A = math.sin(beta) * math.cosh(c)
    B = math.cos(beta)
    R = math.hypot(A, B)
    phi = math.atan2(B, A)
    s = math.cos(gamma) / R
    if abs(s) > 1 + IDENTITY_TOL:
        raise NoSolutionError("closed form has no real solution")
    alpha = phi + math.asin(max(-1.0, min(1.0, s)))
    limit = math.pi - beta - gamma
    if not (0 < alpha <= limit + IDENTITY_TOL):
        raise NoSolutionError(f"apex angle {alpha!r} outside (0, {limit!r}]")
    alpha = min(alpha, limit)
    angles = (alpha, beta, gamma)
    sides = sides_from_angles(angles)
    # side 2 is given exactly; keep the input rather than the recomputed value
    sides = (sides[0], sides[1], float(c))
    return HypTriangleShape(angles, sides, math.pi - sum(angles))


def solve_side_angle_side(b: float, gamma: float, a: float) -> HypTriangleShape:
    """Triangle with sides ``a`` and ``b`` meeting at angle ``gamma`` (angle index 2)."""
    if a <= 0 or b <= 0 or not (0 < gamma < math.pi):
        raise ValueError("need positive sides and an angle in (0, pi)")
    c = safe_acosh(math.cosh(a) * math.cosh(b) - math.sinh(a) * math.sinh(b) * math.cos(gamma))
    shape = solve_sss(a, b, c)
    return HypTriangleShape((shape.angles[0], shape.angles[1], float(gamma)), (a, b, c), math.pi - shape.angles[0] - shape.angles[1] - gamma)


def right_triangle_leg_angle(a: float, d: float) -> float:
    """Angle at the far end of leg ``d`` in a right triangle with legs ``a`` and ``d``."""
    if a <= 0 or d <= 0:
        raise ValueError("legs must be positive")
    return math.atan2(math.tanh(a), math.sinh(d))


def right_triangle(a: float, d: float) -> HypTriangleShape:
    """Right triangle with legs ``a`` and ``d``; angle order (cone, right angle, far end of d)."""
    far = right_triangle_leg_angle(a, d)
    near = right_triangle_leg_angle(d, a)
    hyp = safe_acosh(math.cosh(a) * math.cosh(d))
    angles = (near, math.pi / 2, far)
    return HypTriangleShape(angles, (d, hyp, a), math.pi - sum(angles))


# --- hyperboloid model -------------------------------------------------------

def minkowski_dot(x, y) -> float:
    return float(x[0] * y[0] + x[1] * y[1] - x[2] * y[2])


def hdist(x, y) -> float:
    # chord form 2 asinh(|x - y| / 2) stays accurate for nearby points
    diff = np.asarray(x, float) - np.asarray(y, float)
    return 2.0 * math.asinh(math.sqrt(max(minkowski_dot(diff, diff), 0.0)) / 2.0)


def on_hyperboloid(x, tol: float = IDENTITY_TOL) -> bool:
    return abs(minkowski_dot(x, x) + 1) <= tol and x[2] > 0


def from_polar(r: float, theta: float) -> np.ndarray:
    """Point at distance ``r`` from the base point in direction ``theta``."""
    return np.array([math.sinh(r) * math.cos(theta), math.sinh(r) * math.sin(theta), math.cosh(r)])


def tangent_at(p, q) -> np.ndarray:
    """Unit tangent vector at ``p`` pointing toward ``q``."""
    u = np.asarray(q, float) + minkowski_dot(p, q) * np.asarray(p, float)
    n = math.sqrt(max(minkowski_dot(u, u), 0.0))
    if n == 0:
        raise ValueError("coincident points have no direction")
    return u / n


def angle_at(p, q, r) -> float:
    """Angle at ``p`` between the geodesics toward ``q`` and ``r``."""
    return _safe_acos(minkowski_dot(tangent_at(p, q), tangent_at(p, r)))


def exp_map(p, direction, t: float) -> np.ndarray:
    return math.cosh(t) * np.asarray(p, float) + math.sinh(t) * np.asarray(direction, float)


def geodesic_point(p, q, s: float) -> np.ndarray:
    """Point at fraction ``s`` of the way from ``p`` to ``q``."""
    d = hdist(p, q)
    if d == 0:
        return np.asarray(p, float).copy()
    return exp_map(p, tangent_at(p, q), s * d)


def boost_to_origin(p) -> np.ndarray:
    """Lorentz matrix taking ``p`` to the base point (rotation, then boost along x)."""
    r = hdist(from_polar(0.0, 0.0), p)
    phi = math.atan2(p[1], p[0]) if r > 0 else 0.0
    c, s = math.cos(phi), math.sin(phi)
    rot = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    ch, sh = math.cosh(r), math.sinh(r)
    boost = np.array([[ch, 0.0, -sh], [0.0, 1.0, 0.0], [-sh, 0.0, ch]])
    return boost @ rot


def to_klein(x) -> np.ndarray:
    return np.array([x[0] / x[2], x[1] / x[2]])


def from_klein(k) -> np.ndarray:
    w = 1.0 / math.sqrt(1.0 - k[0] * k[0] - k[1] * k[1])
    return np.array([k[0] * w, k[1] * w, w])


def place_triangle(shape, base: Optional[np.ndarray] = None) -> List[np.ndarray]:
    """Standard placement: vertex 0 at the base point, vertex 1 on the positive x-axis, vertex 2 above."""
    P = from_polar(0.0, 0.0)
    Q = from_polar(shape.sides[2], 0.0)
    R = from_polar(shape.sides[1], shape.angles[0])
    pts = [P, Q, R]
    if base is not None:
        pts = [base @ x for x in pts]
    return pts


def third_point(P, Q, dP: float, dQ: float, side_sign: float) -> np.ndarray:
    """Point at distances dP from P and dQ from Q on the chosen side of line PQ."""
    c = hdist(P, Q)
    angle = _safe_acos((math.cosh(c) * math.cosh(dP) - math.cosh(dQ)) / (math.sinh(c) * math.sinh(dP)))
    u = tangent_at(P, Q)
    # the tangent plane at P is spanned by u and the unit normal of line PQ
    perp = side_sign * _line_normal(P, Q)
    direction = math.cos(angle) * u + math.sin(angle) * perp
    return exp_map(P, direction, dP)


def _line_normal(P, Q) -> np.ndarray:
    """Spacelike normal n of the plane through P, Q (and the origin), with <n, n> = 1."""
    n = np.cross(np.asarray(P, float), np.asarray(Q, float))
    n = np.array([n[0], n[1], -n[2]])  # Minkowski dual of the Euclidean cross product
    return n / math.sqrt(minkowski_dot(n, n))


def side_of_line(P, Q, X) -> float:
    return minkowski_dot(_line_normal(P, Q), X)


def develop_chain(shapes: Sequence, gluing: Sequence[Tuple[int, int]],
                  flips: Optional[Sequence[bool]] = None, base: Optional[np.ndarray] = None) -> List[List[np.ndarray]]:
    """Lay a chain of triangles isometrically in one hyperbolic plane.

    ``gluing[k] = (e_prev, e_next)`` glues edge ``e_prev`` of triangle ``k``
    to edge ``e_next`` of triangle ``k + 1``.  Edge ``e`` joins vertices
    ``e + 1`` and ``e + 2`` (mod 3), i.e. it is opposite vertex ``e``.
    By default vertex ``e_prev + 1`` is matched with ``e_next + 2``
    (the orientation-preserving gluing); ``flips[k]`` reverses it.
    Each new triangle is placed on the opposite side of the shared edge.
    """
    if len(gluing) != len(shapes) - 1:
        raise ValueError("need one gluing per consecutive pair")
    placed = [place_triangle(shapes[0], base)]
    for k, (ep, en) in enumerate(gluing):
        prev_pts = placed[-1]
        shape = shapes[k + 1]
        if abs(shapes[k].sides[ep] - shape.sides[en]) > IDENTITY_TOL:
            raise GluingError(f"edge {ep} of triangle {k} does not match edge {en} of triangle {k + 1}")
        a_prev, b_prev = (ep + 1) % 3, (ep + 2) % 3
        flipped = bool(flips[k]) if flips is not None else False
        if flipped:
            a_next, b_next = (en + 1) % 3, (en + 2) % 3
        else:
            a_next, b_next = (en + 2) % 3, (en + 1) % 3
        pts: List[Optional[np.ndarray]] = [None, None, None]
        pts[a_next] = prev_pts[a_prev]
        pts[b_next] = prev_pts[b_prev]
        P, Q = pts[a_next], pts[b_next]
        old_apex = prev_pts[ep]
        sign = -1.0 if side_of_line(P, Q, old_apex) > 0 else 1.0
        # distance from the apex to each endpoint: sides opposite those vertices
        pts[en] = third_point(P, Q, shape.sides[b_next], shape.sides[a_next], sign)
        placed.append(pts)
    return placed
