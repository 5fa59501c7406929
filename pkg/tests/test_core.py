"""Tests for the ambient-coordinate geometry core."""

import math

import numpy as np
import pytest

from artifact.core import (
    Chart,
    ChartDomainError,
    ChartTag,
    CongruenceError,
    DomainError,
    GeodesicPlane,
    Isometry,
    Point,
    RankError,
    SpaceKind,
    angle_at,
    bilinear,
    chart_from,
    chart_to,
    dihedral_along_edge,
    dihedral_between_planes,
    distance,
    form_matrix,
    geodesic_point,
    isometry_from_point_correspondence,
    plane_through,
    projective_chart,
    reflection_in_plane,
    solve_apex_plane_distance,
    tangent_toward,
    triangle_area,
)
from util import random_isometry, random_point

HYP = SpaceKind.HYPERBOLIC
SPH = SpaceKind.SPHERICAL
ORIGIN4 = np.array([0.0, 0.0, 0.0, 1.0])


def test_bilinear_signature():
    e4 = np.array([0.0, 0.0, 0.0, 1.0])
    e1 = np.array([1.0, 0.0, 0.0, 0.0])
    assert bilinear(e4, e4, HYP) == -1.0
    assert bilinear(e4, e4, SPH) == 1.0
    assert bilinear(e1, e4, HYP) == 0.0
    assert bilinear(e1, e4, SPH) == 0.0


def test_point_validation():
    Point(ORIGIN4, HYP)
    Point(np.array([1.0, 0.0, 0.0, 0.0]), SPH)
    with pytest.raises(DomainError):
        Point(np.array([0.0, 0.0, 0.0, 2.0]), HYP)
    with pytest.raises(DomainError):
        Point(np.array([0.0, 0.0, 0.0, -1.0]), HYP)  # lower sheet
    p = Point.normalized(np.array([0.3, -0.1, 0.2, 1.7]), HYP)
    assert abs(bilinear(p.coords, p.coords, HYP) + 1.0) < 1e-14


def test_distance_examples():
    p = Point(ORIGIN4, HYP)
    q = Point(np.array([math.sinh(1.0), 0.0, 0.0, math.cosh(1.0)]), HYP)
    assert distance(p, p) == 0.0
    assert abs(distance(p, q) - 1.0) < 1e-14
    a = Point(np.array([1.0, 0.0, 0.0, 0.0]), SPH)
    b = Point(np.array([0.0, 1.0, 0.0, 0.0]), SPH)
    assert abs(distance(a, b) - math.pi / 2) < 1e-14


def test_geodesic_point_arclength():
    rng = np.random.default_rng(1)
    for kind in (HYP, SPH):
        p = random_point(rng, kind)
        q = random_point(rng, kind)
        u = tangent_toward(p, q)
        for t in (0.1, 0.5, 1.2):
            x = geodesic_point(p, u, t)
            assert abs(distance(p, x) - t) < 1e-12


def test_distance_isometry_invariance():
    rng = np.random.default_rng(2)
    for kind in (HYP, SPH):
        for _ in range(20):
            iso = random_isometry(rng, kind)
            p = random_point(rng, kind, 1.5)
            q = random_point(rng, kind, 1.5)
            assert abs(distance(iso.apply(p), iso.apply(q))
                       - distance(p, q)) < 1e-10


def test_isometry_form_preservation():
    rng = np.random.default_rng(3)
    for kind in (HYP, SPH):
        g = form_matrix(kind)
        for _ in range(20):
            m = random_isometry(rng, kind).matrix
            assert np.max(np.abs(m.T @ g @ m - g)) < 1e-12


def test_reflection_involution_and_plane_fixing():
    rng = np.random.default_rng(4)
    for kind in (HYP, SPH):
        pts = [random_point(rng, kind) for _ in range(3)]
        pl = plane_through(*pts)
        refl = reflection_in_plane(pl)
        ident = refl.compose(refl).matrix
        assert np.max(np.abs(ident - np.eye(4))) < 1e-12
        for p in pts:
            assert distance(refl.apply(p), p) < 1e-12
        off = random_point(rng, kind)
        assert abs(pl.signed_distance(refl.apply(off))
                   + pl.signed_distance(off)) < 1e-12


def test_plane_through_collinear_raises():
    p = Point(ORIGIN4, HYP)
    u = np.array([1.0, 0.0, 0.0, 0.0])
    q = geodesic_point(p, u, 0.5)
    r = geodesic_point(p, u, 1.0)
    with pytest.raises(RankError):
        plane_through(p, q, r)


def test_dihedral_between_planes_orthogonal():
    n1 = GeodesicPlane(np.array([1.0, 0.0, 0.0, 0.0]), HYP)
    n2 = GeodesicPlane(np.array([0.0, 1.0, 0.0, 0.0]), HYP)
    assert abs(dihedral_between_planes(n1, n2) - math.pi / 2) < 1e-14
    with pytest.raises(DomainError):
        # two planes orthogonal to a common geodesic at different feet
        far = GeodesicPlane(np.array([math.cosh(2.0), 0.0, 0.0,
                                      math.sinh(2.0)]), HYP)
        near = GeodesicPlane(np.array([math.cosh(0.5), 0.0, 0.0,
                                       math.sinh(0.5)]), HYP)
        dihedral_between_planes(far, near)


def test_triangle_area_octant():
    a = Point(np.array([1.0, 0.0, 0.0, 0.0]), SPH)
    b = Point(np.array([0.0, 1.0, 0.0, 0.0]), SPH)
    c = Point(np.array([0.0, 0.0, 1.0, 0.0]), SPH)
    assert abs(triangle_area(a, b, c) - math.pi / 2) < 1e-12


# ---------------------------------------------------------------------------
# apex-plane distance (the cone/plane angle relation)
# ---------------------------------------------------------------------------

def _apex_plane_oracle(r: float, beta_expected: float, s: float,
                       kind: SpaceKind) -> float:
    """Measure the plane angle geometrically for a cone of half-angle r cut
    at axis distance s; fully independent of the closed-form solver.

    Build the tangent lateral plane of the cone through the apex, build the
    cutting plane orthogonal to the axis, find their intersection line
    numerically, and measure the dihedral along it.
    """
    apex = Point(ORIGIN4, kind)
    axis = np.array([0.0, 0.0, 1.0, 0.0])
    # lateral plane: spanned by the tangent-point direction (colatitude r)
    # and the horizontal tangent of the direction circle there
    m_dir = np.array([math.sin(r), 0.0, math.cos(r), 0.0])
    t_dir = np.array([0.0, 1.0, 0.0, 0.0])
    lateral = plane_through(apex,
                            geodesic_point(apex, m_dir, 0.7),
                            geodesic_point(apex, t_dir, 0.9))
    foot = geodesic_point(apex, axis, s)
    ex = np.array([1.0, 0.0, 0.0, 0.0])
    ey = np.array([0.0, 1.0, 0.0, 0.0])
    cutting = plane_through(foot,
                            geodesic_point(foot, ex, 0.8),
                            geodesic_point(foot, ey, 0.6))
    # two points on the intersection line via the joint nullspace
    g = form_matrix(kind)
    rows = np.stack([lateral.normal @ g, cutting.normal @ g])
    _, _, vh = np.linalg.svd(rows)
    basis = vh[2:]

    def line_point(v: np.ndarray) -> Point:
        if kind is SpaceKind.HYPERBOLIC and v[3] < 0:
            v = -v
        return Point.normalized(v, kind)

    # walk the 2D nullspace for two admissible, well-separated points
    found = []
    for lam in np.linspace(-2.0, 2.0, 81):
        v = basis[0] + lam * basis[1]
        if kind is SpaceKind.HYPERBOLIC and bilinear(v, v, kind) > -1e-6:
            continue
        p = line_point(v)
        if all(distance(p, q) > 0.05 for q in found):
            found.append(p)
        if len(found) == 2:
            break
    if len(found) < 2:
        for lam in np.linspace(-2.0, 2.0, 81):
            v = basis[1] + lam * basis[0]
            if kind is SpaceKind.HYPERBOLIC and bilinear(v, v, kind) > -1e-6:
                continue
            p = line_point(v)
            if all(distance(p, q) > 0.05 for q in found):
                found.append(p)
            if len(found) == 2:
                break
    assert len(found) == 2, "failed to sample the intersection line"
    return dihedral_along_edge(found[0], found[1], apex, foot)


@pytest.mark.parametrize("kind,r,beta", [
    (HYP, 0.4, math.pi / 3),
    (HYP, 0.7, 0.8),
    (HYP, 0.2, 1.2),
    (SPH, math.pi / 2, math.pi / 3),
    (SPH, 1.0, 0.9),
    (SPH, 0.8, 1.1),
])
def test_apex_plane_distance_against_oracle(kind, r, beta):
    s = solve_apex_plane_distance(r, beta, kind)
    measured = _apex_plane_oracle(r, beta, s, kind)
    assert abs(measured - beta) < 1e-10


def test_apex_plane_distance_examples():
    # boundary case: s = 0 exactly at r = pi/2 - beta
    s0 = solve_apex_plane_distance(math.pi / 6, math.pi / 3, HYP)
    assert s0 < 1e-7  # exact zero up to acosh conditioning at 1
    s = solve_apex_plane_distance(0.4, math.pi / 3, HYP)
    assert abs(s - math.acosh(0.5 / math.sin(0.4))) < 1e-15
    assert abs(s - 0.7368) < 1e-4
    assert abs(math.cosh(s) * math.sin(0.4) - 0.5) < 1e-15
    s_sph = solve_apex_plane_distance(math.pi / 2, math.pi / 3, SPH)
    assert abs(s_sph - math.pi / 3) < 1e-14


def test_apex_plane_distance_domain_errors():
    with pytest.raises(DomainError):
        solve_apex_plane_distance(1.2, math.pi / 3, HYP)  # r too large
    with pytest.raises(DomainError):
        solve_apex_plane_distance(0.2, 0.3, SPH)  # sin r < cos beta
    with pytest.raises(DomainError):
        solve_apex_plane_distance(0.0, 0.5, HYP)


def test_apex_plane_identity_bulk():
    rng = np.random.default_rng(5)
    for _ in range(500):
        beta = float(rng.uniform(0.05, math.pi / 2 - 0.05))
        r = float(rng.uniform(0.02, 1.0)) * (math.pi / 2 - beta)
        s = solve_apex_plane_distance(r, beta, HYP)
        assert abs(math.cos(beta) - math.cosh(s) * math.sin(r)) < 1e-12
        r_s = float(rng.uniform(math.pi / 2 - beta, math.pi / 2))
        s2 = solve_apex_plane_distance(r_s, beta, SPH)
        assert abs(math.cos(beta) - math.cos(s2) * math.sin(r_s)) < 1e-12


# ---------------------------------------------------------------------------
# point correspondence
# ---------------------------------------------------------------------------

def _spanning_points(rng, kind):
    while True:
        pts = [random_point(rng, kind, 1.2) for _ in range(4)]
        m = np.stack([p.coords for p in pts])
        if np.linalg.matrix_rank(m, tol=1e-6) == 4:
            return pts


def test_correspondence_identity():
    rng = np.random.default_rng(6)
    for kind in (HYP, SPH):
        pts = _spanning_points(rng, kind)
        iso = isometry_from_point_correspondence(pts, pts)
        assert np.max(np.abs(iso.matrix - np.eye(4))) < 1e-9


def test_correspondence_random_isometry():
    rng = np.random.default_rng(7)
    for kind in (HYP, SPH):
        for _ in range(10):
            pts = _spanning_points(rng, kind)
            phi = random_isometry(rng, kind)
            images = [phi.apply(p) for p in pts]
            iso = isometry_from_point_correspondence(pts, images)
            for p, q in zip(pts, images):
                assert distance(iso.apply(p), q) < 1e-9


def test_correspondence_reflection_involution():
    rng = np.random.default_rng(8)
    pts = _spanning_points(rng, HYP)
    pl = plane_through(pts[0], pts[1], pts[2])
    refl = reflection_in_plane(pl)
    images = [refl.apply(p) for p in pts]
    iso = isometry_from_point_correspondence(pts, images)
    twice = iso.compose(iso).matrix
    assert np.max(np.abs(twice - np.eye(4))) < 1e-9


def test_correspondence_errors():
    rng = np.random.default_rng(9)
    pts = _spanning_points(rng, HYP)
    bad = list(pts)
    bad[3] = geodesic_point(pts[3], tangent_toward(pts[3], pts[0]), 0.1)
    with pytest.raises(CongruenceError):
        isometry_from_point_correspondence(pts, bad)
    base = Point(ORIGIN4, HYP)
    u = np.array([1.0, 0.0, 0.0, 0.0])
    collinear = [geodesic_point(base, u, t) for t in (0.0, 0.3, 0.7, 1.1)]
    with pytest.raises(RankError):
        isometry_from_point_correspondence(collinear, collinear)


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------

def _charts_for(kind):
    rng = np.random.default_rng(10)
    if kind is HYP:
        yield Chart(ChartTag.HYPERBOLOID, kind)
        yield Chart(ChartTag.KLEIN, kind)
        yield Chart(ChartTag.KLEIN, kind, random_point(rng, kind))
        yield Chart(ChartTag.UPPER_HALF_SPACE, kind)
        yield Chart(ChartTag.AMBIENT4D, kind)
    else:
        yield Chart(ChartTag.GNOMONIC, kind)
        yield Chart(ChartTag.GNOMONIC, kind, random_point(rng, kind))
        yield Chart(ChartTag.AMBIENT4D, kind)


def test_chart_round_trips():
    rng = np.random.default_rng(11)
    for kind in (HYP, SPH):
        for chart in _charts_for(kind):
            for _ in range(20):
                p = random_point(rng, kind, 1.2)
                x = chart_to(p, chart)
                q = chart_from(x, chart)
                assert distance(p, q) < 1e-12


def test_klein_radial_formula():
    chart = Chart(ChartTag.KLEIN, HYP)
    p = chart_from(np.array([math.tanh(1.0), 0.0, 0.0]), chart)
    center = Point(ORIGIN4, HYP)
    assert abs(distance(center, p) - 1.0) < 1e-12
    assert np.allclose(chart_to(center, chart), 0.0)


def test_gnomonic_radial_formula():
    base = Point(np.array([0.0, 0.0, 0.0, 1.0]), SPH)
    chart = Chart(ChartTag.GNOMONIC, SPH, base)
    from artifact.core import canonical_tangent_frame
    u = canonical_tangent_frame(base)[0]
    p = geodesic_point(base, u, math.pi / 4)
    x = chart_to(p, chart)
    assert abs(np.linalg.norm(x) - 1.0) < 1e-12
    with pytest.raises(ChartDomainError):
        antipode = Point(-base.coords, SPH)
        chart_to(antipode, chart)


def test_projective_charts_flatten_geodesics():
    rng = np.random.default_rng(12)
    for kind in (HYP, SPH):
        chart = projective_chart(kind)
        for _ in range(20):
            p = random_point(rng, kind, 1.0)
            q = random_point(rng, kind, 1.0)
            u = tangent_toward(p, q)
            mid = geodesic_point(p, u, distance(p, q) / 2)
            a, b, m = (chart_to(x, chart) for x in (p, q, mid))
            # midpoint lies on the segment: collinearity + betweenness
            cross = np.cross(b - a, m - a)
            assert np.linalg.norm(cross) < 1e-9 * max(1.0,
                                                      np.linalg.norm(b - a))
            t = np.dot(m - a, b - a) / np.dot(b - a, b - a)
            assert -1e-12 < t < 1.0 + 1e-12


def test_upper_half_space_geometry():
    chart = Chart(ChartTag.UPPER_HALF_SPACE, HYP)
    # vertical spacing between heights 1 and 2 is ln 2
    p = chart_from(np.array([0.0, 0.0, 1.0]), chart)
    q = chart_from(np.array([0.0, 0.0, 2.0]), chart)
    assert abs(distance(p, q) - math.log(2.0)) < 1e-12
    # the origin of the hyperboloid sits at height 1
    assert np.allclose(chart_to(Point(ORIGIN4, HYP), chart),
                       [0.0, 0.0, 1.0], atol=1e-12)
    with pytest.raises(ChartDomainError):
        chart_from(np.array([0.0, 0.0, -1.0]), chart)


def test_angle_at_euclidean_limit():
    # tiny triangles behave Euclidean: angles of a small right triangle
    base = Point(ORIGIN4, HYP)
    e1 = np.array([1.0, 0.0, 0.0, 0.0])
    e2 = np.array([0.0, 1.0, 0.0, 0.0])
    a = geodesic_point(base, e1, 1e-4)
    b = geodesic_point(base, e2, 1e-4)
    assert abs(angle_at(base, a, b) - math.pi / 2) < 1e-8
    assert abs(angle_at(a, base, b) - math.pi / 4) < 1e-4
