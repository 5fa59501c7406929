"""Deformation families of polyhedral surfaces with fixed dihedral angles.

The construction runs in either curved 3-space.  A crossed quadrilateral of
directions at a cone apex O (two sides tangent to a circle of radius r, two
on meridians through its pole) is lifted to a truncated cone against the
plane at distance s(r), doubled by reflection into a closed octahedral
surface M_r, opened into a disk N_r, and glued into a flat kite-shaped hole
cut inside a face of a host tetrahedron T, producing the closed embedded
family P_r.  All dihedral angles of P_r are independent of r while the
metric quantities (area, total mean curvature, vertex curvature, the
distance across the glued kite) vary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from artifact.core import (
    DomainError,
    GeometryError,
    Point,
    SpaceKind,
    canonical_tangent_frame,
    complete_tangent_frame,
    distance,
    geodesic_point,
    isometry_from_frames,
    solve_apex_plane_distance,
    tangent_toward,
)
from artifact.mesh import (
    TriMesh,
    build_mesh,
    oriented_positive,
    surgery_replace,
    transform_mesh,
)

__all__ = [
    "ConfigSchemaError",
    "FamilyParams",
    "ConeQuad",
    "DeformationFamily",
    "cone_quad",
    "apex_plane_distance",
    "build_octahedron_M",
    "build_disk_N",
    "build_host_tetrahedron",
    "build_P",
    "build_family",
    "build_intro_family",
    "intro_family",
    "IntroFamily",
    "host_interior_point",
    "params_from_dict",
    "params_from_json",
    "bundled_params",
]


class ConfigSchemaError(Exception):
    """A family-parameter document violates the expected schema."""


@dataclass(frozen=True)
class FamilyParams:
    kind: SpaceKind
    alphaA: float
    angleB: float
    beta: float
    host_scale: float
    r_min: float
    r_max: float
    margin: float = 0.02
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.beta < math.pi / 2:
            raise ConfigSchemaError("beta must lie in (0, pi/2)")
        for name in ("alphaA", "angleB"):
            v = getattr(self, name)
            if not 0.0 < v < math.pi:
                raise ConfigSchemaError(f"{name} must lie in (0, pi)")
        if not 0.0 < self.r_min < self.r_max:
            raise ConfigSchemaError("need 0 < rMin < rMax")
        if self.host_scale <= 0:
            raise ConfigSchemaError("hostScale must be positive")
        if self.kind is SpaceKind.SPHERICAL \
                and self.host_scale >= math.pi / 2:
            raise ConfigSchemaError(
                "spherical host must fit in an open hemisphere: "
                "hostScale < pi/2")


_PARAM_KEYS = {"kind", "alphaA", "angleB", "beta", "hostScale", "rMin",
               "rMax", "margin", "tolerances"}


def params_from_dict(doc: dict) -> FamilyParams:
    if not isinstance(doc, dict):
        raise ConfigSchemaError("family parameters must be a JSON object")
    unknown = set(doc) - _PARAM_KEYS
    if unknown:
        raise ConfigSchemaError(f"unknown parameter keys: {sorted(unknown)}")
    missing = {"kind", "alphaA", "angleB", "beta", "hostScale", "rMin",
               "rMax"} - set(doc)
    if missing:
        raise ConfigSchemaError(f"missing parameter keys: {sorted(missing)}")
    try:
        kind = SpaceKind(doc["kind"])
    except ValueError:
        raise ConfigSchemaError(
            f"kind must be 'hyperbolic' or 'spherical', got {doc['kind']!r}")
    for key in ("alphaA", "angleB", "beta", "hostScale", "rMin", "rMax"):
        if not isinstance(doc[key], (int, float)):
            raise ConfigSchemaError(f"{key} must be a number")
    return FamilyParams(
        kind=kind, alphaA=float(doc["alphaA"]), angleB=float(doc["angleB"]),
        beta=float(doc["beta"]), host_scale=float(doc["hostScale"]),
        r_min=float(doc["rMin"]), r_max=float(doc["rMax"]),
        margin=float(doc.get("margin", 0.02)),
        tolerances=dict(doc.get("tolerances", {})))


def params_from_json(path: str) -> FamilyParams:
    try:
        with open(path) as f:
            doc = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigSchemaError(f"invalid JSON: {exc}") from exc
    return params_from_dict(doc)


def bundled_params(name: str) -> FamilyParams:
    """Load one of the frozen parameter sets shipped with the package."""
    res = resources.files("artifact").joinpath(f"configs/{name}.json")
    if not res.is_file():
        raise ConfigSchemaError(f"no bundled config named {name!r}")
    return params_from_dict(json.loads(res.read_text()))


@dataclass(frozen=True)
class ConeQuad:
    """Crossed quadrilateral of unit directions at the cone apex.

    Sides ab and cd are tangent to the circle of angular radius r about the
    pole; sides bc and da lie on meridians through the pole.  The angle
    between side ab and the northward meridian is alphaA/2 at a and c,
    angleB/2 at b and d (Clairaut: sin(alphaA/2) sin theta_a = sin r).
    """

    r: float
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    theta_a: float
    theta_b: float
    arc_ab: float
    psi: float


def _polar_dir(theta: float, psi: float) -> np.ndarray:
    return np.array([math.sin(theta) * math.cos(psi),
                     math.sin(theta) * math.sin(psi),
                     math.cos(theta)])


def cone_quad(params: FamilyParams, r: float) -> ConeQuad:
    half_a, half_b = 0.5 * params.alphaA, 0.5 * params.angleB
    sa, sb = math.sin(half_a), math.sin(half_b)
    if math.sin(r) >= min(sa, sb) - 1e-12:
        raise DomainError(
            f"direction quadrilateral infeasible at r={r}: need "
            f"sin r < min(sin(alphaA/2), sin(angleB/2)) = {min(sa, sb):.6f}")
    theta_a = math.asin(math.sin(r) / sa)
    theta_b = math.asin(math.sin(r) / sb)
    # tangent lengths from a, b to the touch points of side ab
    l_a = math.acos(min(1.0, math.cos(theta_a) / math.cos(r)))
    l_b = math.acos(min(1.0, math.cos(theta_b) / math.cos(r)))
    arc_ab = l_a + l_b
    cd_ = (math.cos(arc_ab) - math.cos(theta_a) * math.cos(theta_b)) \
        / (math.sin(theta_a) * math.sin(theta_b))
    delta = math.acos(min(1.0, max(-1.0, cd_)))
    psi = 0.5 * (math.pi - delta)
    return ConeQuad(r=r,
                    a=_polar_dir(theta_a, math.pi - psi),
                    b=_polar_dir(theta_b, psi),
                    c=_polar_dir(theta_a, psi + math.pi),
                    d=_polar_dir(theta_b, -psi),
                    theta_a=theta_a, theta_b=theta_b,
                    arc_ab=arc_ab, psi=psi)


def apex_plane_distance(params: FamilyParams, r: float) -> float:
    return solve_apex_plane_distance(r, params.beta, params.kind)


def _origin(kind: SpaceKind) -> Point:
    return Point(np.array([0.0, 0.0, 0.0, 1.0]), kind)


def _axis_point(kind: SpaceKind, t: float) -> Point:
    if kind is SpaceKind.HYPERBOLIC:
        return Point(np.array([0.0, 0.0, math.sinh(t), math.cosh(t)]), kind)
    return Point(np.array([0.0, 0.0, math.sin(t), math.cos(t)]), kind)


def _lift_direction(kind: SpaceKind, v: np.ndarray, s: float) -> Point:
    """Intersection of the ray from the apex in direction v with the plane
    orthogonal to the pole axis at distance s."""
    if v[2] <= 0:
        raise DomainError("cone ray points away from the cutting plane")
    if kind is SpaceKind.HYPERBOLIC:
        ratio = math.tanh(s) / v[2]
        if ratio >= 1.0:
            raise DomainError(
                f"cone ray misses the cutting plane: cos(theta) = "
                f"{v[2]:.6f} <= tanh s = {math.tanh(s):.6f}")
        t = math.atanh(ratio)
        return Point(np.concatenate([math.sinh(t) * v, [math.cosh(t)]]),
                     kind)
    t = math.atan(math.tan(s) / v[2])
    return Point(np.concatenate([math.sin(t) * v, [math.cos(t)]]), kind)


_M_LABELS = ("O", "a~", "b~", "c~", "d~", "O~")
_M_TRIANGLES = ((0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 1),
                (5, 2, 1), (5, 3, 2), (5, 4, 3), (5, 1, 4))


def build_octahedron_M(params: FamilyParams, r: float) -> TriMesh:
    """Closed octahedral double cone: the truncated cone over the direction
    quadrilateral plus its mirror image in the truncating plane.
    Self-intersecting by construction."""
    quad = cone_quad(params, r)
    s = apex_plane_distance(params, r)
    kind = params.kind
    verts = [_origin(kind),
             _lift_direction(kind, quad.a, s),
             _lift_direction(kind, quad.b, s),
             _lift_direction(kind, quad.c, s),
             _lift_direction(kind, quad.d, s),
             _axis_point(kind, 2.0 * s)]
    return build_mesh(kind, verts, _M_TRIANGLES, _M_LABELS)


def build_disk_N(params: FamilyParams, r: float) -> TriMesh:
    """M_r with the flat wedge along the edge a~ d~ removed: an embedded
    disk with boundary cycle (a~, O, d~, O~)."""
    m = build_octahedron_M(params, r)
    keep = [t for t in m.triangles if t not in ((0, 4, 1), (5, 1, 4))]
    return build_mesh(m.kind, m.vertices, keep, m.labels)


_DIR_X, _DIR_Y, _DIR_Z = (math.radians(210.0), math.radians(330.0),
                          math.radians(90.0))


def _host_points(params: FamilyParams):
    kind = params.kind
    c0 = _origin(kind)
    u1, u2, u3 = canonical_tangent_frame(c0)

    def planar(theta, dist):
        return geodesic_point(c0, math.cos(theta) * u1
                              + math.sin(theta) * u2, dist)

    ell = params.host_scale
    x_ = planar(_DIR_X, ell)
    y_ = planar(_DIR_Y, ell)
    z_ = planar(_DIR_Z, ell)
    m_xy = Point.normalized(x_.coords + y_.coords, kind)
    f_in = tangent_toward(m_xy, c0)
    # the base-plane normal direction u3 has zero pairing with any point of
    # the base plane, so it is also a unit tangent at m_xy
    d_w = math.cos(2.0 * params.beta) * f_in \
        + math.sin(2.0 * params.beta) * u3
    w_ = geodesic_point(m_xy, d_w, ell)
    return c0, (u1, u2, u3), w_, x_, y_, z_


def host_interior_point(params: FamilyParams) -> Point:
    """A point deep inside the host tetrahedron, well away from every face
    and from the glued patch near the base anchor.  Use it as the chart /
    cone center for volume and intersection queries on these surfaces: the
    default vertex-average center can fall arbitrarily close to the patch
    and stall the adaptive quadrature."""
    c0, _, w_, _, _, _ = _host_points(params)
    if params.kind is SpaceKind.HYPERBOLIC:
        return Point.normalized(c0.coords + w_.coords, params.kind)
    # spherically the hemisphere chart must still cover the whole host, so
    # stay close to the base anchor, just clear of the glued patch
    return geodesic_point(c0, tangent_toward(c0, w_),
                          0.3 * distance(c0, w_))


def build_host_tetrahedron(params: FamilyParams) -> TriMesh:
    """Host tetrahedron W X Y Z whose base X Y Z is totally geodesic and
    whose dihedral angle at the edge X Y equals 2*beta exactly."""
    _, _, w_, x_, y_, z_ = _host_points(params)
    m = build_mesh(params.kind, [w_, x_, y_, z_],
                   [(1, 2, 3), (0, 2, 1), (0, 3, 2), (0, 1, 3)],
                   ["W", "X", "Y", "Z"])
    return oriented_positive(m, center=host_interior_point(params))


@dataclass(frozen=True)
class _KiteData:
    s: float
    h_z: float
    h_w: float
    t_a: float
    t_b: float


def _kite_sizes(params: FamilyParams, r: float) -> _KiteData:
    quad = cone_quad(params, r)
    s = apex_plane_distance(params, r)
    o = _origin(params.kind)
    t_a = distance(o, _lift_direction(params.kind, quad.a, s))
    t_b = distance(o, _lift_direction(params.kind, quad.d, s))
    if params.kind is SpaceKind.HYPERBOLIC:
        h_z = math.acosh(max(1.0, math.cosh(t_a) / math.cosh(s)))
        h_w = math.acosh(max(1.0, math.cosh(t_b) / math.cosh(s)))
    else:
        h_z = math.acos(min(1.0, math.cos(t_a) / math.cos(s)))
        h_w = math.acos(min(1.0, math.cos(t_b) / math.cos(s)))
    return _KiteData(s=s, h_z=h_z, h_w=h_w, t_a=t_a, t_b=t_b)


def _face_clearance(params: FamilyParams) -> float:
    """Distance from the base-face anchor to the edges of triangle XYZ."""
    if params.kind is SpaceKind.HYPERBOLIC:
        return math.atanh(math.tanh(params.host_scale) * 0.5)
    return math.atan(math.tan(params.host_scale) * 0.5)


def _check_kite_fits(params: FamilyParams, r: float) -> _KiteData:
    kite = _kite_sizes(params, r)
    reach = max(kite.s, kite.h_z, kite.h_w)
    room = _face_clearance(params)
    if reach + params.margin > room:
        raise DomainError(
            f"hole does not fit inside the host face at r={r}: kite reach "
            f"{reach:.4f} + margin {params.margin} exceeds face clearance "
            f"{room:.4f}; increase hostScale")
    return kite


def _host_with_kite(params: FamilyParams, r: float):
    """Host tetrahedron with the base face triangulated around the flat
    kite-shaped hole x z y w (all four in the base plane, centered at the
    anchor; |xy| = 2 s(r))."""
    kite = _check_kite_fits(params, r)
    c0, (u1, u2, u3), w_, x_, y_, z_ = _host_points(params)
    kind = params.kind

    def planar(theta, dist):
        return geodesic_point(c0, math.cos(theta) * u1
                              + math.sin(theta) * u2, dist)

    kx = planar(0.0, kite.s)
    ky = planar(math.pi, kite.s)
    kz = planar(0.5 * math.pi, kite.h_z)
    kw = planar(1.5 * math.pi, kite.h_w)
    verts = [w_, x_, y_, z_, kx, ky, kz, kw]
    labels = ["W", "X", "Y", "Z", "x", "y", "z", "w"]
    # base-plane polar angles: X 210, Y 330, Z 90 (outer); x 0, z 90,
    # y 180, w 270 (kite).  Annulus strip by an angular two-pointer merge,
    # plus the kite itself split along its x-y diagonal; all triangles
    # counterclockwise as seen from the apex side (+u3)
    base = [
        (3, 5, 6), (3, 1, 5),   # ring: Z-y-z, Z-X-y
        (1, 7, 5), (1, 2, 7),   # X-w-y, X-Y-w
        (2, 4, 7), (2, 3, 4),   # Y-x-w, Y-Z-x
        (3, 6, 4),              # Z-z-x
        (4, 6, 5), (4, 5, 7),   # kite triangles x-z-y and x-y-w
    ]
    side = [(0, 2, 1), (0, 3, 2), (0, 1, 3)]
    m = build_mesh(kind, verts, base + side, labels)
    return m, kite, c0, (u1, u2, u3)


def _phi_isometry(params: FamilyParams, r: float, host_frame, kite: _KiteData,
                  host: TriMesh):
    """Isometry placing the disk N_r into the kite hole: O -> y, O~ -> x,
    a~ -> z, d~ -> w, with the b~ bulge on the outward side of the base."""
    kind = params.kind
    quad = cone_quad(params, r)
    o = _origin(kind)
    # source frame at O: toward O~ (pole axis), and toward the a~ meridian
    f1 = np.array([0.0, 0.0, 1.0, 0.0])
    az = math.pi - quad.psi
    f2 = np.array([math.cos(az), math.sin(az), 0.0, 0.0])
    y_pt, x_pt, z_pt = host.point("y"), host.point("x"), host.point("z")
    g1 = tangent_toward(y_pt, x_pt)
    tz = tangent_toward(y_pt, z_pt)
    g = np.diag([1.0, 1.0, 1.0, kind.eps])
    g2 = tz - float(tz @ g @ g1) * g1
    g2 = g2 / math.sqrt(float(g2 @ g @ g2))
    best = None
    for orientation in (1.0, -1.0):
        f3 = complete_tangent_frame(o, f1, f2, orientation=1.0)[2]
        g3 = complete_tangent_frame(y_pt, g1, g2, orientation=orientation)[2]
        iso = isometry_from_frames(o, [f1, f2, f3], y_pt, [g1, g2, g3])
        b_img = iso.apply(_lift_direction(kind, quad.b, kite.s))
        # outward side of the base plane is opposite the apex W: third
        # ambient coordinate negative
        if b_img.coords[2] < 0:
            best = iso
            break
    if best is None:
        raise GeometryError("could not orient the glued disk outward")
    return best


_PATCH_RELABEL = {"O": "y", "O~": "x", "a~": "z", "d~": "w",
                  "b~": "b~", "c~": "c~"}


def build_P(params: FamilyParams, r: float) -> TriMesh:
    """The closed embedded surface: host tetrahedron with the flat kite in
    its base face replaced by an isometric copy of the disk N_r."""
    host, kite, _, frame = _host_with_kite(params, r)
    host = oriented_positive(host, center=host_interior_point(params))
    phi = _phi_isometry(params, r, frame, kite, host)
    patch = transform_mesh(build_disk_N(params, r), phi,
                           relabel=lambda lab: _PATCH_RELABEL[lab])
    removed = {t for t in host.triangles
               if {host.labels[i] for i in t} in ({"x", "y", "z"},
                                                  {"x", "y", "w"})}
    if len(removed) != 2:
        raise GeometryError("kite triangles not found in host")
    corr = {lab: lab for lab in ("x", "y", "z", "w")}
    try:
        return surgery_replace(host, removed, patch, corr)
    except GeometryError:
        flipped = build_mesh(patch.kind, patch.vertices,
                             [(t[0], t[2], t[1]) for t in patch.triangles],
                             patch.labels)
        return surgery_replace(host, removed, flipped, corr)


@dataclass(frozen=True)
class DeformationFamily:
    params: FamilyParams
    interval: tuple[float, float]

    def generate(self, r: float) -> TriMesh:
        lo, hi = self.interval
        if not lo <= r <= hi:
            raise DomainError(f"r={r} outside the feasible interval "
                              f"[{lo:.6f}, {hi:.6f}]")
        return build_P(self.params, r)

    def samples(self, n: int) -> np.ndarray:
        lo, hi = self.interval
        return np.linspace(lo, hi, n)

    def volume_center(self) -> Point:
        return host_interior_point(self.params)


def _feasible(params: FamilyParams, r: float) -> bool:
    try:
        mesh = build_P(params, r)
    except (DomainError, GeometryError):
        return False
    host_labels = ("W", "X", "Y", "Z")
    patch_labels = ("x", "y", "z", "w", "b~", "c~")
    gap = min(distance(mesh.point(a), mesh.point(b))
              for a in patch_labels for b in host_labels)
    return gap >= params.margin


def build_family(params: FamilyParams, scan: int = 64) -> DeformationFamily:
    """Feasibility-scan the requested r-range and keep the largest
    contiguous feasible run as the working interval."""
    grid = np.linspace(params.r_min, params.r_max, scan)
    ok = [_feasible(params, float(r)) for r in grid]
    best, cur = None, None
    for i, flag in enumerate(ok):
        if flag:
            cur = (cur[0], i) if cur else (i, i)
            if best is None or cur[1] - cur[0] > best[1] - best[0]:
                best = cur
        else:
            cur = None
    if best is None:
        raise DomainError(
            "no feasible r found in the requested range; the family "
            "parameters admit no embedded construction there")
    return DeformationFamily(params=params,
                             interval=(float(grid[best[0]]),
                                       float(grid[best[1]])))


# --------------------------------------------------------------------------
# trivial contrast family: a rotating pyramid bump on a tetrahedron face


_INTRO_SCALE = 0.8
_INTRO_RHO = 0.12
_INTRO_HEIGHT = 0.15
_INTRO_T_MAX = 0.35


@dataclass(frozen=True)
class IntroFamily:
    kind: SpaceKind
    interval: tuple[float, float] = (-0.3, 0.3)

    def generate(self, t: float) -> TriMesh:
        return build_intro_family(self.kind, t)

    def volume_center(self):
        return None


def intro_family(kind: SpaceKind) -> IntroFamily:
    return IntroFamily(kind=kind)


def build_intro_family(kind: SpaceKind, t: float) -> TriMesh:
    """Host tetrahedron with a small pyramid bump on one face, rigidly
    rotated by t about the face's central axis.  Every measured quantity is
    t-invariant."""
    if abs(t) > _INTRO_T_MAX:
        raise DomainError(
            f"rotation parameter t={t} outside the admissible range "
            f"[-{_INTRO_T_MAX}, {_INTRO_T_MAX}]: the bump base would "
            "degenerate the face triangulation")
    c0 = _origin(kind)
    u1, u2, u3 = canonical_tangent_frame(c0)

    def planar(theta, dist):
        return geodesic_point(c0, math.cos(theta) * u1
                              + math.sin(theta) * u2, dist)

    outer_angles = (math.radians(90.0), math.radians(210.0),
                    math.radians(330.0))
    outer = [planar(a, _INTRO_SCALE) for a in outer_angles]
    inner = [planar(a + t, _INTRO_RHO) for a in outer_angles]
    apex_up = geodesic_point(c0, u3, _INTRO_HEIGHT)
    # host apex below the base plane so the bump points away from it
    w_ = geodesic_point(c0, -u3, _INTRO_SCALE)
    verts = outer + inner + [apex_up, w_]
    labels = ["p0", "p1", "p2", "b0", "b1", "b2", "apex", "W"]
    tris = []
    for j in range(3):
        k = (j + 1) % 3
        tris.append((j, k, 3 + k))
        tris.append((j, 3 + k, 3 + j))
        tris.append((3 + j, 3 + k, 6))
    tris += [(7, 1, 0), (7, 2, 1), (7, 0, 2)]
    return oriented_positive(build_mesh(kind, verts, tris, labels))
