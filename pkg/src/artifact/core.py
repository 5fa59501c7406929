"""Shared ambient-coordinate geometry for hyperbolic and spherical 3-space.

Both geometries are handled in a 4-dimensional ambient coordinate space
equipped with the bilinear form diag(1, 1, 1, eps):

* hyperbolic (eps = -1): points live on the upper sheet of <p, p> = -1;
* spherical (eps = +1): points live on the unit sphere <p, p> = +1.

Totally geodesic planes are represented by unit spacelike normals, and
isometries by 4x4 matrices preserving the form.  Charts (Klein, gnomonic,
upper half-space, ...) are views of the same data; the Klein and gnomonic
charts map geodesic planes to flat planes, which downstream code relies on
for flat-triangle computations.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpaceKind",
    "GeometryError",
    "DomainError",
    "CongruenceError",
    "RankError",
    "ChartDomainError",
    "Point",
    "GeodesicPlane",
    "Isometry",
    "Chart",
    "ChartTag",
    "bilinear",
    "form_matrix",
    "distance",
    "geodesic_point",
    "tangent_toward",
    "angle_at",
    "triangle_area",
    "dihedral_between_planes",
    "dihedral_along_edge",
    "plane_through",
    "reflection_in_plane",
    "solve_apex_plane_distance",
    "isometry_from_frames",
    "isometry_from_point_correspondence",
    "canonical_tangent_frame",
    "chart_to",
    "chart_from",
]

FORM_TOL = 1e-12


class GeometryError(ValueError):
    """Base class for geometric failures."""


class DomainError(GeometryError):
    """Input outside the admissible parameter domain."""


class CongruenceError(GeometryError):
    """Point sets are not congruent within tolerance."""


class RankError(GeometryError):
    """Degenerate (non-spanning) configuration."""


class ChartDomainError(GeometryError):
    """Point outside the domain of the requested chart."""


class SpaceKind(enum.Enum):
    HYPERBOLIC = "hyperbolic"
    SPHERICAL = "spherical"

    @property
    def eps(self) -> float:
        return -1.0 if self is SpaceKind.HYPERBOLIC else 1.0


def form_matrix(kind: SpaceKind) -> np.ndarray:
    return np.diag([1.0, 1.0, 1.0, kind.eps])


def bilinear(u: np.ndarray, v: np.ndarray, kind: SpaceKind) -> float:
    """The ambient bilinear form <u, v> with signature set by *kind*."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1]
                 + u[..., 2] * v[..., 2] + kind.eps * u[..., 3] * v[..., 3])


def _normalize_point_coords(coords: np.ndarray, kind: SpaceKind) -> np.ndarray:
    q = bilinear(coords, coords, kind)
    if kind is SpaceKind.HYPERBOLIC:
        if q >= 0:
            raise DomainError("coordinates are not timelike; cannot normalize "
                              "onto the hyperboloid")
        coords = coords / math.sqrt(-q)
        if coords[3] < 0:
            coords = -coords
    else:
        if q <= 0:
            raise DomainError("cannot normalize zero vector onto the sphere")
        coords = coords / math.sqrt(q)
    return coords


@dataclass(frozen=True)
class Point:
    """A point of H^3 or S^3 in ambient coordinates."""

    coords: np.ndarray
    kind: SpaceKind

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float).reshape(4)
        object.__setattr__(self, "coords", coords)
        q = bilinear(coords, coords, self.kind)
        target = self.kind.eps
        if abs(q - target) > 1e-9:
            raise DomainError(f"point does not satisfy <p,p>={target}: {q}")
        if self.kind is SpaceKind.HYPERBOLIC and coords[3] <= 0:
            raise DomainError("hyperbolic point must be on the upper sheet")

    @classmethod
    def normalized(cls, coords: np.ndarray, kind: SpaceKind) -> "Point":
        return cls(_normalize_point_coords(np.asarray(coords, float), kind), kind)


def distance(p: Point, q: Point) -> float:
    """Geodesic distance (radians in the spherical case)."""
    if p.kind is not q.kind:
        raise GeometryError("points live in different geometries")
    diff = q.coords - p.coords
    chord2 = max(0.0, bilinear(diff, diff, p.kind))
    if p.kind is SpaceKind.HYPERBOLIC:
        # <q-p, q-p> = 4 sinh^2(d/2); stable for near-coincident points
        return 2.0 * math.asinh(0.5 * math.sqrt(chord2))
    ip = bilinear(p.coords, q.coords, p.kind)
    if ip >= 0.0:
        # <q-p, q-p> = 4 sin^2(d/2)
        return 2.0 * math.asin(min(1.0, 0.5 * math.sqrt(chord2)))
    return math.acos(min(1.0, max(-1.0, ip)))


def tangent_toward(p: Point, q: Point) -> np.ndarray:
    """Unit tangent vector at p pointing along the geodesic toward q."""
    kind = p.kind
    w = q.coords - kind.eps * bilinear(q.coords, p.coords, kind) * p.coords
    n = bilinear(w, w, kind)
    if n <= 1e-24:
        raise RankError("cannot take tangent direction toward a coincident "
                        "or antipodal point")
    return w / math.sqrt(n)


def geodesic_point(p: Point, u: np.ndarray, t: float) -> Point:
    """Point at arclength t along the unit-speed geodesic from p toward u."""
    kind = p.kind
    if kind is SpaceKind.HYPERBOLIC:
        coords = math.cosh(t) * p.coords + math.sinh(t) * u
    else:
        coords = math.cos(t) * p.coords + math.sin(t) * u
    return Point(_normalize_point_coords(coords, kind), kind)


def angle_at(p: Point, q1: Point, q2: Point) -> float:
    """Angle at p of the geodesic triangle p-q1-q2."""
    t1 = tangent_toward(p, q1)
    t2 = tangent_toward(p, q2)
    c = bilinear(t1, t2, p.kind)
    return math.acos(min(1.0, max(-1.0, c)))


def triangle_area(p: Point, q: Point, r: Point) -> float:
    """Area of a geodesic triangle via angle defect / excess."""
    s = angle_at(p, q, r) + angle_at(q, r, p) + angle_at(r, p, q)
    if p.kind is SpaceKind.HYPERBOLIC:
        return math.pi - s
    return s - math.pi


@dataclass(frozen=True)
class GeodesicPlane:
    """Totally geodesic plane {p : <p, n> = 0} with unit spacelike normal."""

    normal: np.ndarray
    kind: SpaceKind

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float).reshape(4)
        q = bilinear(n, n, self.kind)
        if q <= 0:
            raise DomainError("plane normal must be spacelike")
        object.__setattr__(self, "normal", n / math.sqrt(q))

    def signed_offset(self, p: Point) -> float:
        """<p, n>; zero on the plane, sign identifies the side."""
        return bilinear(p.coords, self.normal, self.kind)

    def signed_distance(self, p: Point) -> float:
        """Signed geodesic distance from p to the plane."""
        s = self.signed_offset(p)
        if self.kind is SpaceKind.HYPERBOLIC:
            return math.asinh(s)
        return math.asin(min(1.0, max(-1.0, s)))


def plane_through(p1: Point, p2: Point, p3: Point) -> GeodesicPlane:
    """The geodesic plane through three points in general position."""
    kind = p1.kind
    g = form_matrix(kind)
    rows = np.stack([p1.coords @ g, p2.coords @ g, p3.coords @ g])
    _, s, vh = np.linalg.svd(rows)
    if s[0] == 0 or s[2] < 1e-10 * s[0]:
        raise RankError("points are geodesically collinear; plane undefined")
    return GeodesicPlane(vh[-1], kind)


@dataclass(frozen=True)
class Isometry:
    """An isometry represented by a form-preserving 4x4 matrix."""

    matrix: np.ndarray
    kind: SpaceKind

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float).reshape(4, 4)
        object.__setattr__(self, "matrix", m)
        g = form_matrix(self.kind)
        residual = np.max(np.abs(m.T @ g @ m - g))
        if residual > FORM_TOL:
            raise DomainError(f"matrix does not preserve the form: {residual}")
        if self.kind is SpaceKind.HYPERBOLIC and m[3, 3] <= 0:
            raise DomainError("hyperbolic isometry must preserve the upper sheet")

    @classmethod
    def identity(cls, kind: SpaceKind) -> "Isometry":
        return cls(np.eye(4), kind)

    def apply(self, p: Point) -> Point:
        return Point(_normalize_point_coords(self.matrix @ p.coords, p.kind),
                     p.kind)

    def apply_plane(self, pl: GeodesicPlane) -> GeodesicPlane:
        g = form_matrix(self.kind)
        # Normals transform by the inverse transpose w.r.t. the form, which
        # for a form-preserving matrix is G M G^{-1}.
        return GeodesicPlane(g @ self.matrix @ np.linalg.inv(g) @ pl.normal,
                             self.kind)

    @property
    def is_orientation_reversing(self) -> bool:
        return float(np.linalg.det(self.matrix)) < 0.0

    def compose(self, other: "Isometry") -> "Isometry":
        """self after other (matrix product self.matrix @ other.matrix)."""
        return Isometry(self.matrix @ other.matrix, self.kind)

    def inverse(self) -> "Isometry":
        g = form_matrix(self.kind)
        return Isometry(np.linalg.inv(g) @ self.matrix.T @ g, self.kind)


def reflection_in_plane(pl: GeodesicPlane) -> Isometry:
    g = form_matrix(pl.kind)
    n = pl.normal
    m = np.eye(4) - 2.0 * np.outer(n, g @ n)
    return Isometry(m, pl.kind)


def dihedral_between_planes(pl1: GeodesicPlane, pl2: GeodesicPlane) -> float:
    """Angle in (0, pi) between two intersecting geodesic planes.

    The value depends on the normal orientations: it is the angle between
    the half-spaces the normals point out of.  Callers that need an interior
    dihedral pass inward-pointing normals.
    """
    if pl1.kind is not pl2.kind:
        raise GeometryError("planes live in different geometries")
    c = bilinear(pl1.normal, pl2.normal, pl1.kind)
    if pl1.kind is SpaceKind.HYPERBOLIC and abs(c) >= 1.0:
        raise DomainError("planes do not intersect (ultraparallel)")
    return math.acos(min(1.0, max(-1.0, c)))


def dihedral_along_edge(p: Point, q: Point, u: Point, v: Point) -> float:
    """Dihedral angle along edge pq between the half-planes toward u and v.

    Measured intrinsically: project u and v to the tangent space at p,
    remove the edge component, and take the angle between the remainders.
    Always in [0, pi]; reflex detection is the caller's concern.
    """
    kind = p.kind
    e = tangent_toward(p, q)

    def ortho(x: Point) -> np.ndarray:
        w = tangent_toward(p, x)
        w = w - bilinear(w, e, kind) * e
        n = bilinear(w, w, kind)
        if n <= 1e-24:
            raise RankError("reference point lies on the edge geodesic")
        return w / math.sqrt(n)

    c = bilinear(ortho(u), ortho(v), kind)
    return math.acos(min(1.0, max(-1.0, c)))


def solve_apex_plane_distance(r: float, beta: float, kind: SpaceKind) -> float:
    """Distance s from a cone apex to the cutting plane.

    For a cone of half-angle r whose lateral planes must meet the cutting
    plane (orthogonal to the axis at distance s) at angle beta:
    hyperbolic cos(beta) = cosh(s) sin(r); spherical cos(beta) = cos(s) sin(r).
    """
    if not 0 < r <= math.pi / 2:
        raise DomainError("cone half-angle r must lie in (0, pi/2]")
    if not 0 < beta < math.pi / 2:
        raise DomainError("plane angle beta must lie in (0, pi/2)")
    ratio = math.cos(beta) / math.sin(r)
    if kind is SpaceKind.HYPERBOLIC:
        if ratio < 1.0 - 1e-15:
            raise DomainError(
                f"infeasible: need sin r <= cos beta, i.e. r <= "
                f"{math.pi / 2 - beta:.6f}")
        return math.acosh(max(1.0, ratio))
    if ratio > 1.0 + 1e-15:
        raise DomainError(
            f"infeasible: need cos beta <= sin r, i.e. r >= "
            f"{math.asin(min(1.0, math.cos(beta))):.6f}")
    return math.acos(min(1.0, ratio))


# ---------------------------------------------------------------------------
# frames and isometries from data
# ---------------------------------------------------------------------------

def _gram_schmidt(p: Point, vectors: list[np.ndarray]) -> list[np.ndarray]:
    """Form-orthonormalize tangent vectors at p, dropping dependent ones."""
    kind = p.kind
    basis: list[np.ndarray] = []
    for v in vectors:
        w = v - kind.eps * bilinear(v, p.coords, kind) * p.coords
        for b in basis:
            w = w - bilinear(w, b, kind) * b
        n = bilinear(w, w, kind)
        if n > 1e-20:
            basis.append(w / math.sqrt(n))
    return basis


def canonical_tangent_frame(p: Point) -> list[np.ndarray]:
    """A deterministic form-orthonormal tangent frame at p."""
    frame = _gram_schmidt(p, [np.eye(4)[i] for i in range(4)])
    if len(frame) != 3:
        raise RankError("failed to complete a tangent frame")
    return frame


def complete_tangent_frame(p: Point, u1: np.ndarray, u2: np.ndarray,
                           orientation: float = 1.0) -> list[np.ndarray]:
    """Complete two orthonormal tangent vectors at p to a full frame.

    The third vector's sign is fixed by the requested orientation of the
    ambient determinant det[u1 u2 u3 p]."""
    frame = _gram_schmidt(p, [u1, u2] + [np.eye(4)[i] for i in range(4)])
    if len(frame) != 3:
        raise RankError("failed to complete a tangent frame")
    u3 = frame[2]
    d = np.linalg.det(np.stack([frame[0], frame[1], u3, p.coords], axis=1))
    if d * orientation < 0:
        u3 = -u3
    return [frame[0], frame[1], u3]


def isometry_from_frames(p_src: Point, frame_src: list[np.ndarray],
                         p_dst: Point, frame_dst: list[np.ndarray]) -> Isometry:
    """Isometry mapping p_src to p_dst and one orthonormal frame to another."""
    kind = p_src.kind
    f_src = np.stack(frame_src + [p_src.coords], axis=1)
    f_dst = np.stack(frame_dst + [p_dst.coords], axis=1)
    g = form_matrix(kind)
    # For a form-orthonormal column matrix F, F^{-1} = D F^T G with
    # D = diag(1,1,1,eps): the columns satisfy F^T G F = G.
    d = np.diag([1.0, 1.0, 1.0, kind.eps])
    m = f_dst @ d @ f_src.T @ g
    # Clean up residual drift so the form-preservation invariant holds to
    # full precision: project onto the form-orthogonal group via one step of
    # the Newton iteration for M (G^{-1} M^{-T} G is the ideal value).
    m = 0.5 * (m + np.linalg.inv(g) @ np.linalg.inv(m).T @ g)
    return Isometry(m, kind)


def isometry_from_point_correspondence(src: list[Point],
                                       dst: list[Point]) -> Isometry:
    """Isometry mapping four labeled points to four congruent labeled points.

    Requires matching pairwise distances (tolerance 1e-9) and affinely
    spanning configurations."""
    if len(src) != 4 or len(dst) != 4:
        raise GeometryError("need exactly four source and four target points")
    kind = src[0].kind
    for i in range(4):
        for j in range(i + 1, 4):
            ds = distance(src[i], src[j])
            dd = distance(dst[i], dst[j])
            if abs(ds - dd) > 1e-9:
                raise CongruenceError(
                    f"distance mismatch between pairs ({i},{j}): "
                    f"{ds!r} vs {dd!r}")
    m_src = np.stack([p.coords for p in src])
    m_dst = np.stack([p.coords for p in dst])
    if np.linalg.matrix_rank(m_src, tol=1e-8) < 4:
        raise RankError("source points are not in general position")

    def frame_at(points: list[Point]) -> tuple[Point, list[np.ndarray]]:
        base = points[0]
        vecs = [points[i].coords for i in (1, 2, 3)]
        frame = _gram_schmidt(base, vecs)
        if len(frame) != 3:
            raise RankError("degenerate configuration for frame construction")
        return base, frame

    b_src, f_src = frame_at(src)
    b_dst, f_dst = frame_at(dst)
    iso = isometry_from_frames(b_src, f_src, b_dst, f_dst)
    worst = max(distance(iso.apply(s), d) for s, d in zip(src, dst))
    if worst > 1e-9:
        raise CongruenceError(f"correspondence residual too large: {worst}")
    return iso


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------

class ChartTag(enum.Enum):
    HYPERBOLOID = "hyperboloid"
    KLEIN = "klein"
    UPPER_HALF_SPACE = "upper-half-space"
    AMBIENT4D = "ambient4d"
    GNOMONIC = "gnomonic"


@dataclass(frozen=True)
class Chart:
    """A coordinate view of H^3 or S^3.

    Klein (hyperbolic) and gnomonic (spherical) map geodesic planes to flat
    planes.  An optional base point recenters those two charts; the frame at
    the base is the deterministic canonical one.
    """

    tag: ChartTag
    kind: SpaceKind
    base: Point | None = None

    def __post_init__(self):
        if self.base is not None and self.base.kind is not self.kind:
            raise GeometryError("chart base lives in the wrong geometry")
        if self.tag is ChartTag.UPPER_HALF_SPACE and \
                self.kind is not SpaceKind.HYPERBOLIC:
            raise GeometryError("upper-half-space chart is hyperbolic only")
        if self.tag is ChartTag.HYPERBOLOID and \
                self.kind is not SpaceKind.HYPERBOLIC:
            raise GeometryError("hyperboloid chart is hyperbolic only")
        if self.tag is ChartTag.GNOMONIC and self.kind is not SpaceKind.SPHERICAL:
            raise GeometryError("gnomonic chart is spherical only")

    def _base_and_frame(self) -> tuple[Point, list[np.ndarray]]:
        if self.base is None:
            origin = np.array([0.0, 0.0, 0.0, 1.0])
            p = Point(origin, self.kind)
            return p, [np.eye(4)[i] for i in range(3)]
        return self.base, canonical_tangent_frame(self.base)


def projective_chart(kind: SpaceKind, base: Point | None = None) -> Chart:
    """The chart in which geodesic planes of *kind* are flat planes."""
    tag = ChartTag.KLEIN if kind is SpaceKind.HYPERBOLIC else ChartTag.GNOMONIC
    return Chart(tag, kind, base)


def chart_to(p: Point, chart: Chart) -> np.ndarray:
    if p.kind is not chart.kind:
        raise GeometryError("point and chart geometry differ")
    x = p.coords
    if chart.tag is ChartTag.AMBIENT4D:
        return x.copy()
    if chart.tag is ChartTag.HYPERBOLOID:
        return x[:3].copy()
    if chart.tag in (ChartTag.KLEIN, ChartTag.GNOMONIC):
        base, frame = chart._base_and_frame()
        denom = chart.kind.eps * bilinear(x, base.coords, chart.kind)
        if denom <= 1e-12:
            raise ChartDomainError(
                "point outside the open hemisphere / sheet of the chart")
        return np.array([bilinear(x, u, chart.kind) for u in frame]) / denom
    if chart.tag is ChartTag.UPPER_HALF_SPACE:
        ball = x[:3] / (1.0 + x[3])  # Poincare ball coordinates
        bx, by, bz = ball
        denom = bx * bx + by * by + (1.0 - bz) ** 2
        if denom <= 1e-15:
            raise ChartDomainError("point maps to infinity of the half space")
        return np.array([2.0 * bx, 2.0 * by,
                         1.0 - float(ball @ ball)]) / denom
    raise GeometryError(f"unsupported chart tag {chart.tag}")


def chart_from(xyz: np.ndarray, chart: Chart) -> Point:
    xyz = np.asarray(xyz, dtype=float)
    kind = chart.kind
    if chart.tag is ChartTag.AMBIENT4D:
        return Point.normalized(xyz, kind)
    if chart.tag is ChartTag.HYPERBOLOID:
        w = math.sqrt(1.0 + float(xyz @ xyz))
        return Point(np.array([xyz[0], xyz[1], xyz[2], w]), kind)
    if chart.tag in (ChartTag.KLEIN, ChartTag.GNOMONIC):
        if chart.tag is ChartTag.KLEIN and float(xyz @ xyz) >= 1.0:
            raise ChartDomainError("Klein coordinates must lie in the open ball")
        base, frame = chart._base_and_frame()
        coords = base.coords + sum(c * u for c, u in zip(xyz, frame))
        return Point.normalized(coords, kind)
    if chart.tag is ChartTag.UPPER_HALF_SPACE:
        hx, hy, hz = xyz
        if hz <= 0:
            raise ChartDomainError("upper-half-space height must be positive")
        denom = hx * hx + hy * hy + (hz + 1.0) ** 2
        ball = np.array([2.0 * hx, 2.0 * hy,
                         hx * hx + hy * hy + hz * hz - 1.0]) / denom
        n2 = float(ball @ ball)
        if n2 >= 1.0:
            raise ChartDomainError("coordinates map outside the ball model")
        scale = 1.0 / (1.0 - n2)
        coords = np.array([2.0 * ball[0] * scale, 2.0 * ball[1] * scale,
                           2.0 * ball[2] * scale, (1.0 + n2) * scale])
        return Point.normalized(coords, kind)
    raise GeometryError(f"unsupported chart tag {chart.tag}")
