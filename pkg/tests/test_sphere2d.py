"""Tests for the direction-sphere (unit 2-sphere) constructions."""

import math

import numpy as np
import pytest

from artifact.core import DomainError
from artifact.sphere2d import (
    Antiparallelogram,
    S2Circle,
    S2GreatCircle,
    S2Point,
    build_antiparallelogram,
    rotation_for_intersection_angle,
    s2_angle_at,
    s2_distance,
    side_length,
    tangent_apex_distance,
    tangent_lines,
)

NORTH = S2Point(np.array([0.0, 0.0, 1.0]))
ALPHA_A = 1.0
ANGLE_B = 0.8
R_SAMPLES = [0.15, 0.25, 0.32, 0.38]


def test_tangent_apex_distance_examples():
    r = 0.37
    assert abs(tangent_apex_distance(r, math.pi) - r) < 1e-14
    assert abs(tangent_apex_distance(math.pi / 6, math.pi / 3)
               - math.pi / 2) < 1e-12
    d = tangent_apex_distance(0.3, 1.0)
    assert abs(d - math.asin(math.sin(0.3) / math.sin(0.5))) < 1e-14
    assert abs(d - 0.66421) < 1e-4
    with pytest.raises(DomainError):
        tangent_apex_distance(0.6, 1.0)  # sin r > sin(alpha/2)


def test_tangent_apex_distance_oracle():
    """The tangent lines from an apex at the returned distance really do
    meet at the requested angle (measured geometrically)."""
    for r, alpha in [(0.3, 1.0), (0.5, 2.4), (0.25, 0.9)]:
        d = tangent_apex_distance(r, alpha)
        apex = S2Point.from_polar(d, 0.2)
        l1, l2 = tangent_lines(S2Circle(NORTH, r), apex)
        # sample a second point on each line to measure the apex angle
        def other_point(line):
            t = np.cross(line.pole, apex.coords)
            p = S2Point.normalized(math.cos(0.3) * apex.coords
                                   + math.sin(0.3) * t / np.linalg.norm(t))
            return p
        ang = s2_angle_at(apex, other_point(l1), other_point(l2))
        assert abs(ang - alpha) < 1e-10 or abs(ang - (math.pi - alpha)) < 1e-10


def test_tangent_apex_distance_numeric_search_oracle():
    """Independent oracle: scan all great circles through the apex for the
    two whose distance to the center equals r, and measure the angle they
    make at the apex.  Uses no tangent-line code."""
    for r, alpha in [(0.3, 1.0), (0.5, 2.4)]:
        d = tangent_apex_distance(r, alpha)
        apex = np.array([math.sin(d), 0.0, math.cos(d)])
        e1 = np.array([math.cos(d), 0.0, -math.sin(d)])
        e2 = np.array([0.0, 1.0, 0.0])
        center = np.array([0.0, 0.0, 1.0])

        def dist_err(t):
            pole = math.cos(t) * e1 + math.sin(t) * e2
            return abs(math.asin(abs(float(pole @ center)))) - r

        ts = np.linspace(0.0, math.pi, 4001)
        roots = []
        for t0, t1 in zip(ts[:-1], ts[1:]):
            if dist_err(t0) == 0.0 or dist_err(t0) * dist_err(t1) < 0:
                lo, hi = t0, t1
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    if dist_err(lo) * dist_err(mid) <= 0:
                        hi = mid
                    else:
                        lo = mid
                roots.append(0.5 * (lo + hi))
        assert len(roots) == 2
        w = []
        for t in roots:
            pole = math.cos(t) * e1 + math.sin(t) * e2
            w.append(np.cross(pole, apex) / np.linalg.norm(np.cross(pole,
                                                                    apex)))
        ang = math.acos(min(1.0, max(-1.0, abs(float(w[0] @ w[1])))))
        assert abs(min(ang, math.pi - ang)
                   - min(alpha, math.pi - alpha)) < 1e-8


def test_tangent_lines_properties():
    circle = S2Circle(NORTH, math.pi / 6)
    apex = S2Point.from_polar(math.pi / 2, 0.7)
    l1, l2 = tangent_lines(circle, apex)
    for line in (l1, l2):
        assert line.contains(apex, tol=1e-12)
        assert abs(line.distance_to_point(NORTH) - circle.radius) < 1e-12
        assert float(line.pole @ NORTH.coords) > 0  # disk-side convention
    # tangents from a point at distance pi/2 meet at 2 arcsin(sin r)
    meet_angle = 2.0 * math.asin(math.sin(math.pi / 6))
    p1, p2 = l1.pole, l2.pole
    measured = math.acos(min(1.0, max(-1.0, float(p1 @ p2))))
    assert (abs(measured - meet_angle) < 1e-12
            or abs(math.pi - measured - meet_angle) < 1e-12)
    with pytest.raises(DomainError):
        tangent_lines(circle, S2Point.from_polar(0.1, 0.0))  # inside
    with pytest.raises(DomainError):
        tangent_lines(circle, S2Point.from_polar(math.pi - 0.1, 0.0))


def test_tangent_lines_swap_under_reflection():
    circle = S2Circle(NORTH, 0.4)
    apex = S2Point.from_polar(1.1, 0.0)
    l1, l2 = tangent_lines(circle, apex)
    # reflection in the plane through apex and center: y -> -y here
    refl = np.diag([1.0, -1.0, 1.0])
    m1, m2 = tangent_lines(circle, S2Point(refl @ apex.coords))
    assert np.allclose(refl @ l1.pole, m2.pole, atol=1e-12)
    assert np.allclose(refl @ l2.pole, m1.pole, atol=1e-12)


def test_rotation_for_intersection_angle():
    assert rotation_for_intersection_angle(0.3, 0.0) == 0.0
    r = 0.3
    phi = rotation_for_intersection_angle(r, math.pi - 2 * r)
    assert abs(phi - math.pi) < 1e-12
    theta = math.acos(math.sin(r) ** 2 + math.cos(r) ** 2 * math.cos(1.0))
    assert abs(rotation_for_intersection_angle(r, theta) - 1.0) < 1e-12
    assert abs(theta - 0.9515) < 1e-4
    with pytest.raises(DomainError):
        rotation_for_intersection_angle(0.5, math.pi - 0.1)


def test_rotation_identity_against_pole_oracle():
    """Brute-force check of cos theta = sin^2 r + cos^2 r cos phi using
    explicit pole vectors at polar angle pi/2 - r."""
    rng = np.random.default_rng(0)
    for _ in range(50):
        r = float(rng.uniform(0.05, 1.4))
        phi = float(rng.uniform(0.05, math.pi - 0.05))
        p1 = np.array([math.cos(r), 0.0, math.sin(r)])
        p2 = np.array([math.cos(r) * math.cos(phi),
                       math.cos(r) * math.sin(phi), math.sin(r)])
        theta_geo = math.acos(min(1.0, max(-1.0, float(p1 @ p2))))
        assert abs(math.cos(theta_geo)
                   - (math.sin(r) ** 2 + math.cos(r) ** 2 * math.cos(phi))) \
            < 1e-12
        assert abs(rotation_for_intersection_angle(r, theta_geo) - phi) < 1e-9


def _arcs_cross(p: S2Point, q: S2Point, u: S2Point, v: S2Point) -> bool:
    """Whether the minor arcs pq and uv intersect in their interiors."""
    n1 = np.cross(p.coords, q.coords)
    n2 = np.cross(u.coords, v.coords)
    x = np.cross(n1, n2)
    if np.linalg.norm(x) < 1e-12:
        return False
    for sign in (1.0, -1.0):
        w = S2Point.normalized(sign * x)
        on_pq = abs(s2_distance(p, w) + s2_distance(w, q)
                    - s2_distance(p, q)) < 1e-9
        on_uv = abs(s2_distance(u, w) + s2_distance(w, v)
                    - s2_distance(u, v)) < 1e-9
        if on_pq and on_uv:
            return True
    return False


@pytest.mark.parametrize("r", R_SAMPLES)
def test_antiparallelogram_invariants(r):
    ap = build_antiparallelogram(r, ALPHA_A, ANGLE_B)
    # equal opposite sides
    assert abs(side_length(ap, "ab") - side_length(ap, "cd")) < 1e-10
    assert abs(side_length(ap, "bc") - side_length(ap, "da")) < 1e-10
    # tangency of all four side geodesics
    for p, q in [(ap.a, ap.b), (ap.b, ap.c), (ap.c, ap.d), (ap.d, ap.a)]:
        pole = S2GreatCircle(np.cross(p.coords, q.coords)
                             / np.linalg.norm(np.cross(p.coords, q.coords)))
        assert abs(pole.distance_to_point(ap.circle.center) - r) < 1e-10
    # requested vertex angles
    assert abs(s2_angle_at(ap.a, ap.d, ap.b) - ALPHA_A) < 1e-10
    assert abs(s2_angle_at(ap.c, ap.b, ap.d) - ALPHA_A) < 1e-10
    assert abs(s2_angle_at(ap.b, ap.a, ap.c) - ANGLE_B) < 1e-10
    assert abs(s2_angle_at(ap.d, ap.c, ap.a) - ANGLE_B) < 1e-10
    # self-intersecting quadrilateral: one pair of opposite sides crosses
    assert (_arcs_cross(ap.b, ap.c, ap.d, ap.a)
            or _arcs_cross(ap.a, ap.b, ap.c, ap.d))


def test_antiparallelogram_continuity():
    r = 0.3
    ap1 = build_antiparallelogram(r, ALPHA_A, ANGLE_B)
    ap2 = build_antiparallelogram(r + 1e-6, ALPHA_A, ANGLE_B)
    for v1, v2 in [(ap1.a, ap2.a), (ap1.b, ap2.b),
                   (ap1.c, ap2.c), (ap1.d, ap2.d)]:
        assert s2_distance(v1, v2) < 1e-4


def test_antiparallelogram_rigidity():
    """|ab| determines r: strict monotonicity over the working interval."""
    rs = np.linspace(0.15, 0.38, 30)
    lengths = [side_length(build_antiparallelogram(float(r), ALPHA_A,
                                                   ANGLE_B), "ab")
               for r in rs]
    diffs = np.diff(lengths)
    assert np.all(diffs > 0) or np.all(diffs < 0)
    spread = max(lengths) - min(lengths)
    assert spread > 1e-3


def test_side_length_errors():
    ap = build_antiparallelogram(0.3, ALPHA_A, ANGLE_B)
    with pytest.raises(DomainError):
        side_length(ap, "ac")
