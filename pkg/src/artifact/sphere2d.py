"""Intrinsic geometry on the unit direction sphere at a cone apex.

Everything here is classical unit-2-sphere trigonometry: tangent great
circles to a small circle, rotations about its center, and the family of
self-intersecting circumscribed quadrilaterals ("antiparallelograms") with
prescribed vertex angles that drives the 3-space constructions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from artifact.core import DomainError

__all__ = [
    "S2Point",
    "S2GreatCircle",
    "S2Circle",
    "Antiparallelogram",
    "s2_distance",
    "s2_angle_at",
    "tangent_apex_distance",
    "tangent_lines",
    "rotation_for_intersection_angle",
    "build_antiparallelogram",
    "side_length",
    "antiparallelogram_feasible",
]


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n < 1e-15:
        raise DomainError("cannot normalize a zero vector")
    return v / n


@dataclass(frozen=True)
class S2Point:
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float).reshape(3)
        if abs(np.linalg.norm(c) - 1.0) > 1e-12:
            raise DomainError("S2 point must be a unit vector")
        object.__setattr__(self, "coords", c)

    @classmethod
    def normalized(cls, v: np.ndarray) -> "S2Point":
        return cls(_unit(np.asarray(v, dtype=float)))

    @classmethod
    def from_polar(cls, colat: float, azim: float) -> "S2Point":
        return cls(np.array([math.sin(colat) * math.cos(azim),
                             math.sin(colat) * math.sin(azim),
                             math.cos(colat)]))


@dataclass(frozen=True)
class S2GreatCircle:
    pole: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pole, dtype=float).reshape(3)
        if abs(np.linalg.norm(p) - 1.0) > 1e-12:
            raise DomainError("great-circle pole must be a unit vector")
        object.__setattr__(self, "pole", p)

    def contains(self, p: S2Point, tol: float = 1e-10) -> bool:
        return abs(float(self.pole @ p.coords)) < tol

    def distance_to_point(self, p: S2Point) -> float:
        return abs(math.asin(min(1.0, max(-1.0, float(self.pole @ p.coords)))))


@dataclass(frozen=True)
class S2Circle:
    center: S2Point
    radius: float

    def __post_init__(self):
        if not 0.0 < self.radius < math.pi / 2:
            raise DomainError("circle radius must lie in (0, pi/2)")


def s2_distance(p: S2Point, q: S2Point) -> float:
    chord = np.linalg.norm(q.coords - p.coords)
    return 2.0 * math.asin(min(1.0, 0.5 * chord))


def s2_angle_at(v: S2Point, p: S2Point, q: S2Point) -> float:
    """Angle at v of the spherical triangle v-p-q."""
    tp = _unit(p.coords - float(p.coords @ v.coords) * v.coords)
    tq = _unit(q.coords - float(q.coords @ v.coords) * v.coords)
    return math.acos(min(1.0, max(-1.0, float(tp @ tq))))


def tangent_apex_distance(r: float, alpha: float) -> float:
    """Distance from a circle's center to an external apex whose two
    tangent great circles meet at angle alpha: sin d = sin r / sin(alpha/2)."""
    if not 0.0 < r < math.pi / 2:
        raise DomainError("circle radius must lie in (0, pi/2)")
    if not 0.0 < alpha <= math.pi:
        raise DomainError("apex angle must lie in (0, pi]")
    s = math.sin(r) / math.sin(alpha / 2)
    if s > 1.0 + 1e-14:
        raise DomainError(
            f"no external apex: need sin r <= sin(alpha/2), got sin r = "
            f"{math.sin(r):.6f}, sin(alpha/2) = {math.sin(alpha / 2):.6f}")
    return math.asin(min(1.0, s))


def tangent_lines(circle: S2Circle, apex: S2Point) -> tuple[S2GreatCircle,
                                                            S2GreatCircle]:
    """The two great circles through an external apex tangent to a circle.

    Pole side convention: poles satisfy pole . center = +sin(radius) (the
    convex disk lies on the positive side of each tangent line).  The first
    returned line is the one whose pole has positive triple product
    det[apex, pole, center].
    """
    o = circle.center.coords
    a = apex.coords
    d = s2_distance(circle.center, apex)
    if d <= circle.radius + 1e-12:
        raise DomainError("apex must lie strictly outside the circle")
    if d >= math.pi - circle.radius - 1e-12:
        raise DomainError("apex must lie outside the antipodal disk as well")
    e1 = _unit(o - float(o @ a) * a)
    e2 = _unit(np.cross(a, o))
    ct = math.sin(circle.radius) / math.sin(d)
    t = math.acos(min(1.0, max(-1.0, ct)))
    p_plus = math.cos(t) * e1 + math.sin(t) * e2
    p_minus = math.cos(t) * e1 - math.sin(t) * e2
    lines = [S2GreatCircle(p_plus), S2GreatCircle(p_minus)]
    lines.sort(key=lambda gc: -float(np.dot(np.cross(a, gc.pole), o)))
    return lines[0], lines[1]


def rotation_for_intersection_angle(r: float, theta: float) -> float:
    """Rotation angle about a circle's center making a tangent line meet its
    rotated copy at angle theta: cos theta = sin^2 r + cos^2 r cos phi."""
    if not 0.0 < r < math.pi / 2:
        raise DomainError("circle radius must lie in (0, pi/2)")
    c = (math.cos(theta) - math.sin(r) ** 2) / math.cos(r) ** 2
    if not -1.0 - 1e-12 <= c <= 1.0 + 1e-12:
        raise DomainError(
            f"intersection angle {theta} unattainable for radius {r}: "
            f"attainable range is [0, {math.pi - 2 * r}]")
    return math.acos(min(1.0, max(-1.0, c)))


@dataclass(frozen=True)
class Antiparallelogram:
    """A self-intersecting spherical quadrilateral circumscribed about a
    circle, with equal opposite side lengths and angles alphaA at a, c and
    angleB at b, d."""

    a: S2Point
    b: S2Point
    c: S2Point
    d: S2Point
    circle: S2Circle
    angleA: float
    angleB: float


def _side_pole(p: S2Point, q: S2Point) -> np.ndarray:
    return _unit(np.cross(p.coords, q.coords))


def _arcs_cross(p: S2Point, q: S2Point, u: S2Point, v: S2Point) -> bool:
    """Whether the minor arcs pq and uv meet in their interiors."""
    x = np.cross(np.cross(p.coords, q.coords), np.cross(u.coords, v.coords))
    if np.linalg.norm(x) < 1e-12:
        return False
    for sign in (1.0, -1.0):
        w = S2Point.normalized(sign * x)
        if (abs(s2_distance(p, w) + s2_distance(w, q)
                - s2_distance(p, q)) < 1e-9
                and abs(s2_distance(u, w) + s2_distance(w, v)
                        - s2_distance(u, v)) < 1e-9):
            return True
    return False


def _tangent_azimuth_offset(r: float, colat: float) -> float:
    """Azimuthal offset between a point at the given colatitude and the two
    points where its tangent lines touch the circle of radius r."""
    c = math.tan(r) / math.tan(colat) if colat != math.pi / 2 else 0.0
    return math.acos(min(1.0, max(-1.0, c)))


def build_antiparallelogram(r: float, alphaA: float,
                            angleB: float) -> Antiparallelogram:
    """The circumscribed antiparallelogram with angles alphaA at a, c and
    angleB at b, d about the circle of radius r around the north pole.

    The quadrilateral is mirror symmetric (a<->c, b<->d) across a meridian
    plane; vertex colatitudes are fixed by the tangent-apex relation and the
    azimuths are solved from the side-tangency conditions, enumerating the
    finitely many branch choices and keeping the self-intersecting solution
    with the requested vertex angles.
    """
    center = S2Point(np.array([0.0, 0.0, 1.0]))

    def colat_options(angle: float) -> list[float]:
        # a vertex angle can be the tangent-pencil angle or its supplement,
        # and the vertex may lie in either hemisphere
        opts: list[float] = []
        for eff in (angle, math.pi - angle):
            try:
                th = tangent_apex_distance(r, eff)
            except DomainError:
                continue
            for cand in (th, math.pi - th):
                if all(abs(cand - o) > 1e-12 for o in opts):
                    opts.append(cand)
        return opts

    opts_a = colat_options(alphaA)
    opts_b = colat_options(angleB)
    if not opts_a or not opts_b:
        raise DomainError(
            f"no external apex admits vertex angle "
            f"{alphaA if not opts_a else angleB} about a circle of "
            f"radius {r}: need sin r <= max(sin, cos) of half the angle")

    def candidates():
        for th_a in opts_a:
            for th_b in opts_b:
                g_a = _tangent_azimuth_offset(r, th_a)
                g_b = _tangent_azimuth_offset(r, th_b)
                for ea in (1.0, -1.0):
                    for eb in (1.0, -1.0):
                        for da_ in (1.0, -1.0):
                            for db_ in (1.0, -1.0):
                                for k in (0, 1, -1):
                                    u = eb * g_b - ea * g_a
                                    v = (da_ * g_a - db_ * g_b
                                         + 2.0 * math.pi * k)
                                    yield th_a, th_b, 0.5 * (u + v), \
                                        0.5 * (v - u)

    for th_a, th_b, psi_a, psi_b in candidates():
        a = S2Point.from_polar(th_a, psi_a)
        b = S2Point.from_polar(th_b, psi_b)
        c = S2Point.from_polar(th_a, -psi_a)
        d = S2Point.from_polar(th_b, -psi_b)
        verts = [a, b, c, d]
        if min(s2_distance(p, q) for i, p in enumerate(verts)
               for q in verts[i + 1:]) < 1e-6:
            continue
        try:
            poles = [_side_pole(p, q) for p, q in
                     [(a, b), (b, c), (c, d), (d, a)]]
        except DomainError:
            continue
        if any(abs(abs(math.asin(min(1.0, max(-1.0, float(n @ center.coords)))))
                   - r) > 1e-9 for n in poles):
            continue
        if (abs(s2_angle_at(a, d, b) - alphaA) > 1e-8
                or abs(s2_angle_at(c, b, d) - alphaA) > 1e-8
                or abs(s2_angle_at(b, a, c) - angleB) > 1e-8
                or abs(s2_angle_at(d, c, a) - angleB) > 1e-8):
            continue
        if not (_arcs_cross(a, b, c, d) or _arcs_cross(b, c, d, a)):
            continue
        return Antiparallelogram(a=a, b=b, c=c, d=d,
                                 circle=S2Circle(center, r),
                                 angleA=alphaA, angleB=angleB)
    raise DomainError(
        f"no circumscribed self-intersecting quadrilateral with angles "
        f"({alphaA}, {angleB}) exists around a circle of radius {r}")


def side_length(ap: Antiparallelogram, side: str) -> float:
    pairs = {"ab": (ap.a, ap.b), "bc": (ap.b, ap.c),
             "cd": (ap.c, ap.d), "da": (ap.d, ap.a)}
    if side not in pairs:
        raise DomainError(f"unknown side {side!r}; expected ab/bc/cd/da")
    p, q = pairs[side]
    return s2_distance(p, q)


def antiparallelogram_feasible(r: float, alphaA: float, angleB: float) -> bool:
    try:
        build_antiparallelogram(r, alphaA, angleB)
        return True
    except DomainError:
        return False
