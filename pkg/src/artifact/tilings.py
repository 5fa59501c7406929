"""Deformable tilings in both curved 3-spaces, verified over finite windows.

Hyperbolic side: the classical horosphere-layer tiling of hyperbolic 3-space
by congruent nonconvex 13-vertex cells.  In the upper-half-space model the
level-k horosphere sits at height 2^k; the similarity x -> x/2 is a
hyperbolic isometry moving the whole stack down one level, and two unit
horizontal translations generate each layer's square lattice.  Every cell is
a curvilinear box: four side-1 square caps below, one side-2 square cap
above, and four pentagonal vertical walls.

Spherical side: the 12-cell tiling of the 3-sphere obtained by centrally
projecting the faces of an inscribed cube onto the equatorial 2-sphere and
coning each projected square to the north and south poles.

Both tilings admit volume-preserving deformations: a triangular hole is cut
into a wall of the reference cell and refilled with the deformable bounded
surface from the construction module, together with a congruent copy on the
opposite wall (translated, respectively point-reflected) so that neighboring
cells keep interlocking for every deformation parameter.  Adjacency of the
deformed cells is verified face-by-face over finite windows.
"""

from __future__ import annotations

import json
import math
import os
import re
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from artifact.core import (
    Chart,
    ChartDomainError,
    ChartTag,
    DomainError,
    GeometryError,
    Isometry,
    Point,
    SpaceKind,
    chart_from,
    chart_to,
    complete_tangent_frame,
    distance,
    form_matrix,
    geodesic_point,
    isometry_from_frames,
    projective_chart,
    tangent_toward,
)
from artifact.mesh import (
    TriMesh,
    _atomic_write,
    build_mesh,
    export_mesh,
    oriented_positive,
    point_in_mesh,
    surgery_replace,
    transform_mesh,
)
from artifact.construction import build_P

__all__ = [
    "BoroczkyFrame",
    "TileWindow",
    "boroczky_frame",
    "boroczky_cell",
    "boroczky_window",
    "modified_boroczky_cell",
    "spherical_12_tiling",
    "modified_spherical_cell",
    "window_overlaps",
    "window_export",
    "upper_half_space_point",
    "upper_half_space_coords",
]


# ---------------------------------------------------------------------------
# upper-half-space helpers (hyperbolic)
# ---------------------------------------------------------------------------

_UHS_CHART = Chart(ChartTag.UPPER_HALF_SPACE, SpaceKind.HYPERBOLIC)

# Change of basis between ambient coordinates (X1, X2, X3, X4) and the
# null-direction coordinates (w1, w2, u, v) = (X1, X2, X3 + X4, X4 - X3), in
# which horizontal translations and vertical scalings of the half space act
# by sparse linear maps.
_NULL_FROM_AMBIENT = np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0],
                               [0, 0, 1.0, 1.0], [0, 0, -1.0, 1.0]])
_AMBIENT_FROM_NULL = np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0],
                               [0, 0, 0.5, -0.5], [0, 0, 0.5, 0.5]])


def upper_half_space_point(x: float, y: float, t: float) -> Point:
    """The hyperbolic point with upper-half-space coordinates (x, y, t)."""
    return chart_from(np.array([x, y, t], dtype=float), _UHS_CHART)


def upper_half_space_coords(p: Point) -> np.ndarray:
    """Upper-half-space coordinates (x, y, t) of a hyperbolic point."""
    return chart_to(p, _UHS_CHART)


def _uhs_translation(a: float, b: float) -> Isometry:
    """The isometry acting as (x, y, t) -> (x + a, y + b, t)."""
    m = np.array([[1.0, 0.0, 0.0, a],
                  [0.0, 1.0, 0.0, b],
                  [2.0 * a, 2.0 * b, 1.0, a * a + b * b],
                  [0.0, 0.0, 0.0, 1.0]])
    return Isometry(_AMBIENT_FROM_NULL @ m @ _NULL_FROM_AMBIENT,
                    SpaceKind.HYPERBOLIC)


def _uhs_scaling(lam: float) -> Isometry:
    """The isometry acting as (x, y, t) -> lam * (x, y, t)."""
    m = np.diag([1.0, 1.0, lam, 1.0 / lam])
    return Isometry(_AMBIENT_FROM_NULL @ m @ _NULL_FROM_AMBIENT,
                    SpaceKind.HYPERBOLIC)


def _uhs_tangent_frame(x: float, y: float, t: float):
    """Unit tangent vectors at (x, y, t) along the x, y, and t directions."""
    s = x * x + y * y + t * t
    dx = np.array([1.0 / t, 0.0, x / t, x / t])
    dy = np.array([0.0, 1.0 / t, y / t, y / t])
    dt = np.array([-x / t ** 2, -y / t ** 2,
                   (2.0 * t * t - s + 1.0) / (2.0 * t * t),
                   (2.0 * t * t - s - 1.0) / (2.0 * t * t)])
    return t * dx, t * dy, t * dt


# ---------------------------------------------------------------------------
# the hyperbolic layer frame and reference cell
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoroczkyFrame:
    """Horosphere stack, square grids, and the three generating isometries.

    The level-k horosphere sits at upper-half-space height 2^k, carrying a
    square grid of intrinsic side 1 (coordinate side 2^k).  phi is the
    similarity by one level down the stack, psi and chi are the two unit
    horizontal translations of the level-0 grid.
    """

    sigma0_height: float
    phi: Isometry
    psi: Isometry
    chi: Isometry

    def sigma_height(self, k: int) -> float:
        return self.sigma0_height * 2.0 ** k

    def axis_point(self, k: int) -> Point:
        """The marked grid origin on the level-k horosphere (the points A_k
        lie on the vertical axis line)."""
        return upper_half_space_point(0.0, 0.0, self.sigma_height(k))

    def grid_point(self, k: int, i: float, j: float) -> Point:
        """Vertex (i, j) of the level-k square grid."""
        h = self.sigma_height(k)
        return upper_half_space_point(i * h, j * h, h)


def boroczky_frame() -> BoroczkyFrame:
    return BoroczkyFrame(sigma0_height=1.0,
                         phi=_uhs_scaling(0.5),
                         psi=_uhs_translation(0.0, 1.0),
                         chi=_uhs_translation(1.0, 0.0))


# Cell vertex labels: level-0 grid points (x = chi-shift, p = psi-shift) and
# the four level-1 corners.
_CELL_GRID = {
    "A0": (0, 0, 0), "B0": (0, 1, 0), "C0": (0, 1, 1), "D0": (0, 0, 1),
    "pD0": (0, 0, 2), "pC0": (0, 1, 2), "xB0": (0, 2, 0), "xC0": (0, 2, 1),
    "xpC0": (0, 2, 2),
    "A1": (1, 0, 0), "B1": (1, 1, 0), "C1": (1, 1, 1), "D1": (1, 0, 1),
}

# Square caps, split along the diagonal from the (i, j)-low corner so that
# the level-1 cap of the scaled-down neighbor uses the same diagonal.
_CAP_TRIANGLES = [
    ("A0", "C0", "B0"), ("A0", "D0", "C0"),
    ("B0", "xC0", "xB0"), ("B0", "C0", "xC0"),
    ("D0", "pC0", "C0"), ("D0", "pD0", "pC0"),
    ("C0", "xpC0", "xC0"), ("C0", "pC0", "xpC0"),
    ("A1", "B1", "C1"), ("A1", "C1", "D1"),
]

# Pentagonal walls, fanned from a level-1 corner.
_WALL_Y0_CYCLE = ["A1", "A0", "B0", "xB0", "B1"]
_WALL_Y0 = [("A1", "A0", "B0"), ("A1", "B0", "xB0"), ("A1", "xB0", "B1")]
_WALL_X0 = [("A1", "D1", "pD0"), ("A1", "pD0", "D0"), ("A1", "D0", "A0")]
_WALL_Y2 = [("D1", "C1", "xpC0"), ("D1", "xpC0", "pC0"), ("D1", "pC0", "pD0")]
_WALL_X2 = [("B1", "xB0", "xC0"), ("B1", "xC0", "xpC0"), ("B1", "xpC0", "C1")]

# Label image under the translation carrying the y=0 wall to the y=2 wall.
_PSI2_WALL = {"A1": "D1", "A0": "pD0", "B0": "pC0", "xB0": "xpC0", "B1": "C1"}

_CELL_MARKER_UHS = (1.0, 1.0, 1.55)


def _cell_vertices(frame: BoroczkyFrame):
    labels = list(_CELL_GRID)
    points = [frame.grid_point(*_CELL_GRID[lab]) for lab in labels]
    return labels, points


def _mesh_from_label_triangles(kind, labels, points, tris):
    index = {lab: i for i, lab in enumerate(labels)}
    return build_mesh(kind, points, [tuple(index[l] for l in t) for t in tris],
                      labels)


def boroczky_cell(frame: BoroczkyFrame) -> TriMesh:
    """The closed 13-vertex reference cell of the horosphere-layer tiling.

    Four square caps of intrinsic side 1 below, one square cap of side 2
    above, four pentagonal vertical walls; 22 triangles in total.  Unit-
    lattice translates of the cell tile a layer, and the similarity phi
    carries each layer onto the next.
    """
    labels, points = _cell_vertices(frame)
    tris = _CAP_TRIANGLES + _WALL_Y0 + _WALL_X0 + _WALL_Y2 + _WALL_X2
    mesh = _mesh_from_label_triangles(SpaceKind.HYPERBOLIC, labels, points,
                                      tris)
    return oriented_positive(mesh,
                             center=upper_half_space_point(*_CELL_MARKER_UHS))


# ---------------------------------------------------------------------------
# ring triangulation of an annulus between two star-shaped cycles
# ---------------------------------------------------------------------------

def _ring_strip(outer_xy, inner_xy):
    """Triangulate the annulus between an outer cycle and an inner point
    set, both star-shaped around the inner points' centroid.  Returns
    (triangles, inner_cycle): triangles over markers ('o', i) / ('i', j)
    traversing the outer cycle in its given order, and the inner indices in
    the matching angular order (the winding of the hole polygon)."""
    center = np.mean(np.asarray(inner_xy, dtype=float), axis=0)

    def angles(pts):
        return [math.atan2(p[1] - center[1], p[0] - center[0]) for p in pts]

    out_ang = angles(outer_xy)
    in_ang = angles(inner_xy)

    def unwrap(start, raw):
        seq = [start]
        for a in raw:
            step = (a - seq[-1]) % (2.0 * math.pi)
            seq.append(seq[-1] + step)
        return seq[1:]

    # orient so the outer cycle has increasing angle; flip both if not
    probe = unwrap(out_ang[0], out_ang[1:])
    if probe and probe[-1] - out_ang[0] > 2.0 * math.pi:
        out_ang = [-a for a in out_ang]
        in_ang = [-a for a in in_ang]
    m, n = len(out_ang), len(in_ang)
    o = [out_ang[0]] + unwrap(out_ang[0], out_ang[1:])
    o.append(o[0] + 2.0 * math.pi)
    # sort the inner points by angle, starting just after the first outer one
    in_order = sorted(range(n),
                      key=lambda j: (in_ang[j] - o[0]) % (2.0 * math.pi))
    i = [o[0] + (in_ang[j] - o[0]) % (2.0 * math.pi) for j in in_order]
    i.append(i[0] + 2.0 * math.pi)
    tris = []
    a = b = 0
    while a < m or b < n:
        if a < m and (b == n or o[a + 1] <= i[min(b + 1, n)]):
            tris.append((("o", a % m), ("o", (a + 1) % m),
                         ("i", in_order[b % n])))
            a += 1
        else:
            tris.append((("o", a % m), ("i", in_order[(b + 1) % n]),
                         ("i", in_order[b % n])))
            b += 1
    return tris, in_order


def _plane_coords(kind, anchor, e1, e2, pts):
    """2D coordinates of points of a geodesic plane in the projective chart
    anchored at a point of the plane with the given tangent frame."""
    chart = projective_chart(kind, anchor)
    basis = []
    for e in (e1, e2):
        v = chart_to(geodesic_point(anchor, e, 0.05), chart)
        basis.append(v / np.linalg.norm(v))
    b = np.stack(basis, axis=1)
    out = []
    for p in pts:
        v = chart_to(p, chart)
        sol, *_ = np.linalg.lstsq(b, v, rcond=None)
        out.append(sol)
    return out


def _polygon_margin(outer_xy, pts_xy) -> float:
    """Minimum distance from the points to the boundary of the polygon;
    negative if any point lies outside."""
    from shapely.geometry import Point as Pt, Polygon

    poly = Polygon([tuple(p) for p in outer_xy])
    worst = math.inf
    for p in pts_xy:
        pt = Pt(*p)
        d = poly.exterior.distance(pt)
        if not poly.covers(pt):
            d = -d
        worst = min(worst, d)
    return worst


# ---------------------------------------------------------------------------
# placing the deformable patch into a wall
# ---------------------------------------------------------------------------

def _family_params(family):
    return getattr(family, "params", family)


def _wall_patch(family, r: float) -> TriMesh:
    """The deformable bounded surface with its flat apex-side triangular
    face removed: a disk whose boundary is that triangle."""
    generate = getattr(family, "generate", None)
    mesh = generate(r) if callable(generate) else \
        build_P(_family_params(family), r)
    tris = [t for t in mesh.triangles
            if {mesh.labels[i] for i in t} != {"W", "Y", "Z"}]
    if len(tris) != len(mesh.triangles) - 1:
        raise GeometryError("expected exactly one apex-side triangle")
    return build_mesh(mesh.kind, mesh.vertices, tris, mesh.labels)


def _hole_isometry(patch: TriMesh, anchor: Point, g1, g2, outward) -> Isometry:
    """Isometry carrying the patch boundary triangle into the plane spanned
    by (g1, g2) at the anchor, with the patch body on the outward side."""
    kind = patch.kind
    w_pt, y_pt, z_pt = (patch.point(l) for l in ("W", "Y", "Z"))
    f1 = tangent_toward(w_pt, y_pt)
    tz = tangent_toward(w_pt, z_pt)
    g = form_matrix(kind)
    f2 = tz - float(tz @ g @ f1) * f1
    f2 = f2 / math.sqrt(float(f2 @ g @ f2))
    f3 = complete_tangent_frame(w_pt, f1, f2, orientation=1.0)[2]
    body = patch.point("X")
    for orientation in (1.0, -1.0):
        g3 = complete_tangent_frame(anchor, g1, g2, orientation=orientation)[2]
        iso = isometry_from_frames(w_pt, [f1, f2, f3], anchor, [g1, g2, g3])
        side = float(iso.apply(body).coords @ g @ np.asarray(outward, float))
        if side > 0:
            return iso
    raise GeometryError("could not orient the glued patch outward")


def _glue_patch(host: TriMesh, hole_labels, patch: TriMesh) -> TriMesh:
    removed = {t for t in host.triangles
               if {host.labels[i] for i in t} == set(hole_labels)}
    if len(removed) != 1:
        raise GeometryError("hole triangle not found in host")
    corr = {lab: lab for lab in hole_labels}
    try:
        return surgery_replace(host, removed, patch, corr)
    except GeometryError:
        flipped = build_mesh(patch.kind, patch.vertices,
                             [(t[0], t[2], t[1]) for t in patch.triangles],
                             patch.labels)
        return surgery_replace(host, removed, flipped, corr)


# ---------------------------------------------------------------------------
# the modified (deformable) hyperbolic cell
# ---------------------------------------------------------------------------

# Placement of the triangular hole on the y=0 pentagonal wall: anchor in
# upper-half-space coordinates and rotation of the in-wall frame.
_B_ANCHOR = (1.05, 1.35)
_B_THETA = 1.45


def modified_boroczky_cell(frame: BoroczkyFrame, family, r: float) -> TriMesh:
    """The reference cell with a triangular hole cut into its y=0 pentagonal
    wall and refilled by the deformable surface, plus the translated
    congruent copy on the opposite wall so unit-lattice translates still
    interlock.  All dihedral angles are independent of r."""
    params = _family_params(family)
    if params.kind is not SpaceKind.HYPERBOLIC:
        raise DomainError("the layer tiling needs a hyperbolic family")
    kind = SpaceKind.HYPERBOLIC
    labels, points = _cell_vertices(frame)
    h = frame.sigma0_height
    patch = _wall_patch(family, r)

    xa, ta = _B_ANCHOR
    anchor = upper_half_space_point(xa * h, 0.0, ta * h)
    ex, ey, et = _uhs_tangent_frame(xa * h, 0.0, ta * h)
    g1 = math.cos(_B_THETA) * ex + math.sin(_B_THETA) * et
    g2 = -math.sin(_B_THETA) * ex + math.cos(_B_THETA) * et
    iso = _hole_isometry(patch, anchor, g1, g2, -ey)
    hole_pts = [iso.apply(patch.point(l)) for l in ("W", "Y", "Z")]

    pentagon = [points[labels.index(l)] for l in _WALL_Y0_CYCLE]
    xy = _plane_coords(kind, anchor, ex, et, pentagon + hole_pts)
    margin = _polygon_margin(xy[:5], xy[5:])
    if margin < params.margin:
        raise DomainError(f"hole placement violates the fit margin: "
                          f"{margin:.4f} < {params.margin}")

    hole1 = ["h1a", "h1b", "h1c"]
    strip, inner_cycle = _ring_strip(xy[:5], xy[5:])
    names = {"o": _WALL_Y0_CYCLE, "i": hole1}
    wall_y0 = [tuple(names[s][i] for s, i in t) for t in strip]
    wall_y0.append(tuple(hole1[j] for j in inner_cycle))
    psi2 = dict(_PSI2_WALL)
    psi2.update({"h1a": "h2a", "h1b": "h2b", "h1c": "h2c"})
    wall_y2 = [(psi2[a], psi2[c], psi2[b]) for a, b, c in wall_y0]

    psi2_iso = frame.psi.compose(frame.psi)
    all_labels = labels + hole1 + ["h2a", "h2b", "h2c"]
    all_points = points + hole_pts + [psi2_iso.apply(p) for p in hole_pts]
    tris = _CAP_TRIANGLES + _WALL_X0 + _WALL_X2 + wall_y0 + wall_y2
    host = _mesh_from_label_triangles(kind, all_labels, all_points, tris)
    host = oriented_positive(host,
                             center=upper_half_space_point(*_CELL_MARKER_UHS))

    relabel1 = {"W": "h1a", "Y": "h1b", "Z": "h1c"}
    patch1 = transform_mesh(patch, iso,
                            relabel=lambda l: relabel1.get(l, "g1:" + l))
    patch2 = transform_mesh(patch1, psi2_iso,
                            relabel=lambda l: "h2" + l[2:] if
                            l.startswith("h1") else "g2:" + l[3:])
    mesh = _glue_patch(host, hole1, patch1)
    return _glue_patch(mesh, ["h2a", "h2b", "h2c"], patch2)


# ---------------------------------------------------------------------------
# windows and adjacency verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TileWindow:
    """A finite set of placed cells with verified face adjacencies.

    adjacency entries are (word_a, face_a, word_b, face_b, residual): the
    two triangle faces coincide with the given vertex-matching residual."""

    kind: SpaceKind
    cells: tuple
    adjacency: tuple
    markers: tuple


def _triangle_residual(ma: TriMesh, ta, mb: TriMesh, tb) -> float:
    worst = 0.0
    for i in ta:
        best = min(distance(ma.vertices[i], mb.vertices[j]) for j in tb)
        worst = max(worst, best)
    return worst


def _match_adjacency(cells, tol: float = 1e-6):
    centroids = []
    for _, m in cells:
        centroids.append(np.array([
            np.mean([m.vertices[i].coords for i in t], axis=0)
            for t in m.triangles]))
    adjacency = []
    for a in range(len(cells)):
        tree = cKDTree(centroids[a])
        for b in range(a + 1, len(cells)):
            hits = tree.query_ball_point(centroids[b], r=tol)
            for fb, lst in enumerate(hits):
                for fa in lst:
                    res = _triangle_residual(cells[a][1],
                                             cells[a][1].triangles[fa],
                                             cells[b][1],
                                             cells[b][1].triangles[fb])
                    adjacency.append((cells[a][0], fa, cells[b][0], fb, res))
    return tuple(adjacency)


def _inside(mesh: TriMesh, p: Point, center: Point) -> bool:
    try:
        return point_in_mesh(mesh, p, center=center)
    except ChartDomainError:
        # beyond the chart hemisphere of a cell that fits inside it: outside
        return False


def window_overlaps(window: TileWindow) -> bool:
    """True if any cell's interior marker lies inside another cell (an
    interior overlap); cells that merely share boundary faces do not
    overlap."""
    for a, (_, ma) in enumerate(window.cells):
        if not _inside(ma, window.markers[a], window.markers[a]):
            raise GeometryError("interior marker escaped its own cell")
        for b, (_, mb) in enumerate(window.cells):
            if a != b and _inside(mb, window.markers[a], window.markers[b]):
                return True
    return False


def boroczky_window(frame: BoroczkyFrame, k_range, p_range, q_range,
                    family=None, r: float | None = None) -> TileWindow:
    """Cells phi^k psi^(2p) chi^(2q) of the layer tiling (the translation
    lattice of a layer has period two grid units in each direction), with
    all coinciding faces matched.  With a family and parameter r the window
    is built from the modified deformable cell."""
    ks, ps, qs = list(k_range), list(p_range), list(q_range)
    if not (ks and ps and qs):
        raise DomainError("window ranges must be nonempty")
    if len(ks) * len(ps) * len(qs) > 64 or max(abs(k) for k in ks) > 20:
        raise DomainError("window too large for stable placement near the "
                          "ideal boundary")
    base = boroczky_cell(frame) if family is None else \
        modified_boroczky_cell(frame, family, r)
    marker0 = upper_half_space_point(*_CELL_MARKER_UHS)
    cells, markers = [], []
    for k in ks:
        scale = frame.phi if k >= 0 else frame.phi.inverse()
        word_k = Isometry.identity(SpaceKind.HYPERBOLIC)
        for _ in range(abs(k)):
            word_k = scale.compose(word_k)
        for p in ps:
            for q in qs:
                iso = word_k.compose(_uhs_translation(2.0 * q, 2.0 * p))
                word = f"phi^{k}.psi^{2 * p}.chi^{2 * q}"
                cells.append((word, transform_mesh(base, iso)))
                markers.append(iso.apply(marker0))
    return TileWindow(kind=SpaceKind.HYPERBOLIC, cells=tuple(cells),
                      adjacency=_match_adjacency(cells),
                      markers=tuple(markers))


# ---------------------------------------------------------------------------
# the spherical 12-cell tiling
# ---------------------------------------------------------------------------

_SQ3 = math.sqrt(3.0)
_FACE1_VERTICES = [np.array(v) / _SQ3 for v in
                   [(1.0, 1.0, 1.0), (1.0, -1.0, 1.0),
                    (1.0, -1.0, -1.0), (1.0, 1.0, -1.0)]]

# Rotations of the equatorial 2-sphere carrying face 1 (center +x) onto the
# six cube faces; all fix the poles N and S.
_FACE_ROTATIONS = [
    np.eye(3),
    np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
    np.array([[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]),
    np.diag([-1.0, -1.0, 1.0]),
    np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
    np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]]),
]

_SPH = SpaceKind.SPHERICAL


def _sph(coords3, w: float = 0.0) -> Point:
    return Point.normalized(np.array([*coords3, w], dtype=float), _SPH)


def _north() -> Point:
    return Point(np.array([0.0, 0.0, 0.0, 1.0]), _SPH)


def face_rotation(j: int) -> Isometry:
    """The pole-fixing rotation carrying cell pair 1 onto cell pair j."""
    if not 1 <= j <= 6:
        raise DomainError("face index must be in 1..6")
    m = np.eye(4)
    m[:3, :3] = _FACE_ROTATIONS[j - 1]
    return Isometry(m, _SPH)


def _central_reflection(o: Point) -> Isometry:
    """The point reflection of the 3-sphere through o."""
    return Isometry(2.0 * np.outer(o.coords, o.coords) - np.eye(4), _SPH)


_TN_LATERAL = [("N", "v2", "v1"), ("N", "v3", "v2"),
               ("N", "v4", "v3"), ("N", "v1", "v4")]
_TN_BASE = [("v1", "v2", "v3"), ("v1", "v3", "v4")]
# label image under the point reflection through the face center
_SIGMA_MAP = {"N": "S", "S": "N", "v1": "v3", "v2": "v4", "v3": "v1",
              "v4": "v2"}


def _north_cell_mesh(base_tris, extra_labels=(), extra_points=()) -> TriMesh:
    labels = ["N", "v1", "v2", "v3", "v4"] + list(extra_labels)
    points = [_north()] + [_sph(v) for v in _FACE1_VERTICES] + \
        list(extra_points)
    mesh = _mesh_from_label_triangles(_SPH, labels, points,
                                      _TN_LATERAL + list(base_tris))
    center = Point.normalized(np.array([1.0, 0.0, 0.0, 1.0]), _SPH)
    return oriented_positive(mesh, center=center)


def _sigma_relabel(lab: str) -> str:
    if lab in _SIGMA_MAP:
        return _SIGMA_MAP[lab]
    if lab.startswith(("h1", "g1:")):
        return "h2" + lab[2:] if lab.startswith("h1") else "g2:" + lab[3:]
    if lab.startswith(("h2", "g2:")):
        return "h1" + lab[2:] if lab.startswith("h2") else "g1:" + lab[3:]
    return lab


# Placement of the triangular hole on the equatorial face: geodesic offset
# from the face center toward the v2 corner, and in-face frame rotation.
_S_OFFSET = 0.32
_S_THETA = 0.74


def modified_spherical_cell(family, r: float, j: int = 1):
    """The deformed north/south cell pair: a triangular hole in the
    equatorial face refilled by the deformable surface, together with the
    point-reflected congruent copy, so the pair stays centrally symmetric
    and interlocks.  Returns (north cell, south cell) for pair j."""
    params = _family_params(family)
    if params.kind is not _SPH:
        raise DomainError("the 12-cell tiling needs a spherical family")
    patch = _wall_patch(family, r)
    o1 = _sph([1.0, 0.0, 0.0])
    v = [_sph(c) for c in _FACE1_VERTICES]
    anchor = geodesic_point(o1, tangent_toward(o1, v[1]), _S_OFFSET)
    e1 = tangent_toward(anchor, v[1])
    g = form_matrix(_SPH)
    t2 = tangent_toward(anchor, v[0])
    e2 = t2 - float(t2 @ g @ e1) * e1
    e2 = e2 / math.sqrt(float(e2 @ g @ e2))
    g1 = math.cos(_S_THETA) * e1 + math.sin(_S_THETA) * e2
    g2 = -math.sin(_S_THETA) * e1 + math.cos(_S_THETA) * e2
    south = np.array([0.0, 0.0, 0.0, -1.0])
    iso = _hole_isometry(patch, anchor, g1, g2, south)
    hole_pts = [iso.apply(patch.point(l)) for l in ("W", "Y", "Z")]

    half1 = [v[0], v[1], v[2]]
    xy = _plane_coords(_SPH, anchor, e1, e2, half1 + hole_pts)
    margin = _polygon_margin(xy[:3], xy[3:])
    if margin < params.margin:
        raise DomainError(f"hole placement violates the fit margin: "
                          f"{margin:.4f} < {params.margin}")

    hole1 = ["h1a", "h1b", "h1c"]
    strip, inner_cycle = _ring_strip(xy[:3], xy[3:])
    names = {"o": ["v1", "v2", "v3"], "i": hole1}
    half1_tris = [tuple(names[s][i] for s, i in t) for t in strip]
    half1_tris.append(tuple(hole1[j] for j in inner_cycle))
    sigma = _central_reflection(o1)
    half2_tris = [tuple(_sigma_relabel(l) for l in t) for t in half1_tris]
    hole2_pts = [sigma.apply(p) for p in hole_pts]

    host = _north_cell_mesh(
        half1_tris + half2_tris,
        extra_labels=hole1 + ["h2a", "h2b", "h2c"],
        extra_points=hole_pts + hole2_pts)

    relabel1 = {"W": "h1a", "Y": "h1b", "Z": "h1c"}
    patch1 = transform_mesh(patch, iso,
                            relabel=lambda l: relabel1.get(l, "g1:" + l))
    patch2 = transform_mesh(patch1, sigma, relabel=_sigma_relabel)
    north = _glue_patch(host, hole1, patch1)
    north = _glue_patch(north, ["h2a", "h2b", "h2c"], patch2)
    south_center = Point.normalized(np.array([1.0, 0.0, 0.0, -1.0]), _SPH)
    south_cell = oriented_positive(
        transform_mesh(north, sigma, relabel=_sigma_relabel),
        center=south_center)
    rot = face_rotation(j)
    if j != 1:
        north = transform_mesh(north, rot)
        south_cell = transform_mesh(south_cell, rot)
    return north, south_cell


def spherical_12_tiling(family=None, r: float | None = None) -> TileWindow:
    """The tiling of the 3-sphere by twelve congruent cells: the six
    centrally projected cube faces, each coned to the north and the south
    pole.  With a family and parameter r the deformed pairs are used.  Each
    south cell is the point reflection of its north partner through the
    shared face center."""
    cells, markers = [], []
    m_north = Point.normalized(np.array([1.0, 0.0, 0.0, 1.0]), _SPH)
    m_south = Point.normalized(np.array([1.0, 0.0, 0.0, -1.0]), _SPH)
    if family is None:
        north = _north_cell_mesh(_TN_BASE)
        south = oriented_positive(
            transform_mesh(north, _central_reflection(_sph([1, 0, 0])),
                           relabel=_sigma_relabel),
            center=m_south)
    else:
        north, south = modified_spherical_cell(family, r, 1)
    for jj in range(1, 7):
        rot = face_rotation(jj)
        for pole, mesh, marker in (("N", north, m_north),
                                   ("S", south, m_south)):
            placed = mesh if jj == 1 else transform_mesh(mesh, rot)
            cells.append((f"phi{jj}.{pole}", placed))
            markers.append(rot.apply(marker))
    return TileWindow(kind=_SPH, cells=tuple(cells),
                      adjacency=_match_adjacency(cells),
                      markers=tuple(markers))


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def _slug(word: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", word).replace(".", "_")


def window_export(window: TileWindow, directory: str) -> None:
    """One OFF file per cell (chart coordinates centered at the cell's
    interior marker) plus a JSON adjacency manifest."""
    os.makedirs(directory, exist_ok=True)
    files = {}
    for (word, mesh), marker in zip(window.cells, window.markers):
        chart = projective_chart(window.kind, marker)
        name = f"cell_{_slug(word)}.off"
        export_mesh(mesh, chart, os.path.join(directory, name))
        files[word] = name
    manifest = {
        "cells": [{"word": w, "file": files[w]} for w, _ in window.cells],
        "adjacency": [
            {"cell": a, "face": fa, "neighbor": b, "neighbor_face": fb,
             "residual": res}
            for a, fa, b, fb, res in window.adjacency],
    }
    _atomic_write(os.path.join(directory, "adjacency.json"),
                  json.dumps(manifest, indent=2, sort_keys=True) + "\n")
