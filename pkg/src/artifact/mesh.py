"""Oriented triangulated polyhedral surfaces in curved 3-space.

A TriMesh stores labeled vertices on the hyperboloid / unit 3-sphere and
oriented triangles.  Measurements: per-edge dihedral angles (reflex angles
supported via the inside orientation), vertex angle defects, intrinsic
surface area, total mean curvature, enclosed volume by chart-density
quadrature, and tolerance-based self-intersection testing in a projective
chart.  Surgery replaces a disk of triangles by a patch with a matching
boundary.  OFF and CSV export round-trip through charts.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from artifact.core import (
    Chart,
    ChartDomainError,
    CongruenceError,
    DomainError,
    GeometryError,
    Point,
    SpaceKind,
    angle_at,
    bilinear,
    chart_from,
    chart_to,
    distance,
    form_matrix,
    geodesic_point,
    projective_chart,
    tangent_toward,
    triangle_area,
)

__all__ = [
    "TriMesh",
    "EdgeRecord",
    "IntersectionReport",
    "build_mesh",
    "edge_table",
    "edge_table_csv",
    "vertex_gauss_curvature",
    "surface_area",
    "total_mean_curvature",
    "enclosed_volume",
    "self_intersects",
    "surgery_replace",
    "export_mesh",
    "import_mesh",
    "mesh_chart_center",
    "oriented_positive",
    "refine_once",
    "split_face_at_centroid",
    "geodesic_ball_mesh",
    "point_in_mesh",
    "tetrahedron_mesh",
]

_MIN_SEPARATION = 1e-9


@dataclass(frozen=True)
class TriMesh:
    """An oriented triangulated surface with stable vertex labels."""

    kind: SpaceKind
    vertices: tuple[Point, ...]
    triangles: tuple[tuple[int, int, int], ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.vertices) != len(self.labels):
            raise GeometryError("labels and vertices must correspond 1-1")
        if len(set(self.labels)) != len(self.labels):
            raise GeometryError("vertex labels must be unique")
        for p in self.vertices:
            if p.kind != self.kind:
                raise GeometryError("vertex space kind mismatch")
        n = len(self.vertices)
        for tri in self.triangles:
            if len(set(tri)) != 3 or any(not 0 <= i < n for i in tri):
                raise GeometryError(f"invalid triangle {tri}")
        if self.triangles:
            g = form_matrix(self.kind)
            eps = self.kind.eps
            coords = np.array([p.coords for p in self.vertices])
            tris = np.array(self.triangles)
            pa, pb, pc = (coords[tris[:, i]] for i in range(3))

            def too_close(x, y):
                d = x - y
                return np.einsum("ij,jk,ik->i", d, g, d) \
                    < _MIN_SEPARATION ** 2

            close = too_close(pa, pb) | too_close(pb, pc) | too_close(pa, pc)
            if np.any(close):
                raise GeometryError(
                    f"degenerate triangle {self.triangles[int(np.argmax(close))]}: "
                    "vertices too close")

            def unit_tangent(p, q):
                t = q - eps * np.einsum("ij,jk,ik->i", q, g, p)[:, None] * p
                nn = np.sqrt(np.einsum("ij,jk,ik->i", t, g, t))
                return t / nn[:, None]

            ta = unit_tangent(pa, pb)
            tb = unit_tangent(pa, pc)
            cosang = np.clip(np.einsum("ij,jk,ik->i", ta, g, tb), -1.0, 1.0)
            bad = np.arccos(cosang)
            flat = (bad < 1e-9) | (bad > math.pi - 1e-9)
            if np.any(flat):
                raise GeometryError(
                    f"degenerate triangle {self.triangles[int(np.argmax(flat))]}: "
                    "collinear vertices")
        # edge incidence and orientation consistency
        directed: dict[tuple[int, int], int] = {}
        for t, (i, j, k) in enumerate(self.triangles):
            for e in ((i, j), (j, k), (k, i)):
                if e in directed:
                    raise GeometryError(
                        f"edge {e} traversed twice in the same direction; "
                        "inconsistent orientation")
                directed[e] = t
        boundary = [e for e in directed if (e[1], e[0]) not in directed]
        if boundary:
            # a disk-type mesh must have a single boundary cycle
            nxt = {e[0]: e[1] for e in boundary}
            if len(nxt) != len(boundary):
                raise GeometryError("boundary is not a union of simple "
                                    "cycles")
            start = boundary[0][0]
            seen, cur = 1, nxt[start]
            while cur != start:
                cur = nxt[cur]
                seen += 1
                if seen > len(boundary):
                    raise GeometryError("boundary does not close up")
            if seen != len(boundary):
                raise GeometryError("mesh has more than one boundary cycle")

    @property
    def is_closed(self) -> bool:
        directed = {(t[a], t[(a + 1) % 3]) for t in self.triangles
                    for a in range(3)}
        return all((j, i) in directed for i, j in directed)

    def boundary_cycle(self) -> list[int]:
        """Vertex indices along the (single) boundary cycle, in the
        orientation induced by the triangles."""
        directed = {(t[a], t[(a + 1) % 3]) for t in self.triangles
                    for a in range(3)}
        boundary = [(i, j) for i, j in directed if (j, i) not in directed]
        if not boundary:
            raise GeometryError("mesh is closed; no boundary cycle")
        nxt = dict(boundary)
        start = boundary[0][0]
        cycle = [start]
        cur = nxt[start]
        while cur != start:
            cycle.append(cur)
            cur = nxt[cur]
        return cycle

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise GeometryError(f"unknown vertex label {label!r}") from None

    def point(self, label: str) -> Point:
        return self.vertices[self.index_of(label)]

    def euler_characteristic(self) -> int:
        edges = {frozenset((t[a], t[(a + 1) % 3])) for t in self.triangles
                 for a in range(3)}
        return len(self.vertices) - len(edges) + len(self.triangles)


def build_mesh(kind: SpaceKind, vertices, triangles, labels) -> TriMesh:
    return TriMesh(kind=kind, vertices=tuple(vertices),
                   triangles=tuple(tuple(t) for t in triangles),
                   labels=tuple(labels))


def transform_mesh(m: TriMesh, iso, relabel=None) -> TriMesh:
    """Apply an isometry vertex-wise; optionally rename labels through a
    callable or prefix string."""
    if relabel is None:
        labels = m.labels
    elif callable(relabel):
        labels = tuple(relabel(lab) for lab in m.labels)
    else:
        labels = tuple(f"{relabel}{lab}" for lab in m.labels)
    tris = m.triangles
    if getattr(iso, "is_orientation_reversing", None):
        tris = tuple((t[0], t[2], t[1]) for t in tris)
    return build_mesh(m.kind, [iso.apply(p) for p in m.vertices], tris,
                      labels)


@dataclass(frozen=True)
class EdgeRecord:
    endpoints: tuple[str, str]
    length: float
    dihedral: float

    def __post_init__(self):
        if self.length <= 0:
            raise GeometryError("edge length must be positive")
        if not 0.0 < self.dihedral < 2.0 * math.pi:
            raise GeometryError("dihedral must lie in (0, 2*pi)")


def _face_normal(m: TriMesh, tri: tuple[int, int, int],
                 at: int) -> np.ndarray:
    """Unit tangent vector at vertex `at` of the oriented triangle,
    orthogonal to the face plane, pointing to the triangle's positive side
    (right-hand rule in the tangent space)."""
    order = list(tri)
    pos = order.index(at)
    i, j, k = order[pos], order[(pos + 1) % 3], order[(pos + 2) % 3]
    p = m.vertices[i]
    tj = tangent_toward(p, m.vertices[j])
    tk = tangent_toward(p, m.vertices[k])
    g = form_matrix(m.kind)
    rows = np.vstack([p.coords @ g, tj @ g, tk @ g])
    _, _, vh = np.linalg.svd(rows)
    n = vh[-1]
    n = n / math.sqrt(abs(float(n @ g @ n)))
    # expanding along the first column flips the 3x3 right-hand-rule sign
    if np.linalg.det(np.column_stack([p.coords, tj, tk, n])) > 0:
        n = -n
    return n


def _edge_dihedral(m: TriMesh, i: int, j: int, t1: tuple[int, int, int],
                   t2: tuple[int, int, int]) -> float:
    """Interior dihedral angle along edge (i, j) between the oriented
    triangles t1 (traversing i->j) and t2 (traversing j->i), measured
    through the inside; reflex angles exceed pi."""
    p = m.vertices[i]
    g = form_matrix(m.kind)
    u = tangent_toward(p, m.vertices[j])

    def wing(tri):
        other = next(v for v in tri if v not in (i, j))
        t = tangent_toward(p, m.vertices[other])
        w = t - float(t @ g @ u) * u
        nw = math.sqrt(float(w @ g @ w))
        if nw < 1e-12:
            raise GeometryError(f"degenerate wing along edge ({i}, {j})")
        return w / nw

    w1, w2 = wing(t1), wing(t2)
    inward = -_face_normal(m, t1, i)
    ang = math.atan2(float(w2 @ g @ inward), float(w2 @ g @ w1))
    if ang <= 0.0:
        ang += 2.0 * math.pi
    return ang


def edge_table(m: TriMesh) -> list[EdgeRecord]:
    """One record per geometric edge of a closed oriented mesh."""
    directed: dict[tuple[int, int], tuple[int, int, int]] = {}
    for tri in m.triangles:
        for a in range(3):
            directed[(tri[a], tri[(a + 1) % 3])] = tri
    records = []
    for (i, j), t1 in directed.items():
        if i > j:
            continue
        t2 = directed.get((j, i))
        if t2 is None:
            raise GeometryError(
                f"boundary edge ({m.labels[i]}, {m.labels[j]}): edge table "
                "requires a closed surface")
        length = distance(m.vertices[i], m.vertices[j])
        records.append(EdgeRecord(
            endpoints=(m.labels[i], m.labels[j]), length=length,
            dihedral=_edge_dihedral(m, i, j, t1, t2)))
    records.sort(key=lambda r: r.endpoints)
    return records


def vertex_gauss_curvature(m: TriMesh, label: str) -> float:
    """2*pi minus the sum of incident triangle angles at the vertex."""
    v = m.index_of(label)
    total = 0.0
    found = False
    for tri in m.triangles:
        if v in tri:
            found = True
            others = [w for w in tri if w != v]
            total += angle_at(m.vertices[v], m.vertices[others[0]],
                              m.vertices[others[1]])
    if not found:
        raise GeometryError(f"vertex {label!r} belongs to no triangle")
    return 2.0 * math.pi - total


def surface_area(m: TriMesh) -> float:
    return sum(triangle_area(*(m.vertices[i] for i in tri))
               for tri in m.triangles)


def total_mean_curvature(m: TriMesh) -> float:
    return 0.5 * sum((math.pi - rec.dihedral) * rec.length
                     for rec in edge_table(m))


def mesh_chart_center(m: TriMesh) -> Point:
    """A chart center near the mesh: the normalized vertex average."""
    avg = np.mean([p.coords for p in m.vertices], axis=0)
    q = float(bilinear(avg, avg, m.kind))
    if (m.kind is SpaceKind.HYPERBOLIC and q >= -1e-9) or \
            (m.kind is SpaceKind.SPHERICAL and q <= 1e-9):
        raise ChartDomainError(
            "vertex average does not determine a chart center; pass an "
            "explicit interior point to recenter")
    return Point.normalized(avg, m.kind)


def _chart_coords(m: TriMesh, center: Point | None) -> np.ndarray:
    c = center if center is not None else mesh_chart_center(m)
    chart = projective_chart(m.kind, c)
    try:
        return np.array([chart_to(p, chart) for p in m.vertices])
    except ChartDomainError as exc:
        raise ChartDomainError(
            f"{exc}; mesh does not fit the projective chart — recenter "
            "with an explicit interior point") from exc


# degree-5 7-point quadrature rule on the reference triangle
_QW = np.array([0.225]
               + [0.13239415278850618] * 3
               + [0.12593918054482715] * 3)
_A1, _B1 = 0.059715871789769797, 0.47014206410511505
_A2, _B2 = 0.79742698535308720, 0.10128650732345633
_QP = np.array([[1 / 3, 1 / 3, 1 / 3],
                [_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1],
                [_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2]])


def _cone_density(kind: SpaceKind, rr: np.ndarray) -> np.ndarray:
    """g(R)/R^3 where g(R) is the radial chart-volume integral
    int_0^R t^2 rho(t) dt with rho the projective chart density."""
    r = np.sqrt(rr)
    out = np.empty_like(r)
    small = r < 1e-4
    out[small] = 1.0 / 3.0  # limit of g(R)/R^3 as R -> 0, both densities
    rs = r[~small]
    if kind is SpaceKind.HYPERBOLIC:
        g = 0.5 * (rs / (1.0 - rs ** 2) - np.arctanh(rs))
    else:
        g = 0.5 * (np.arctan(rs) - rs / (1.0 + rs ** 2))
    out[~small] = g / rs ** 3
    return out


def _cone_rule_vec(kind: SpaceKind, a: np.ndarray, b: np.ndarray,
                   c: np.ndarray) -> np.ndarray:
    """Per-triangle quadrature of the cone integrand; a, b, c are (F, 3)."""
    nvec = np.cross(b - a, c - a)
    out = np.zeros(len(a))
    for w, (l0, l1, l2) in zip(_QW, _QP):
        pts = l0 * a + l1 * b + l2 * c
        rr = np.einsum("ij,ij->i", pts, pts)
        out += w * _cone_density(kind, rr) * np.einsum("ij,ij->i", pts, nvec)
    return 0.5 * out


def enclosed_volume(m: TriMesh, tol: float = 1e-7,
                    center: Point | None = None) -> float:
    """Volume enclosed by a closed, outward-oriented, embedded mesh.

    Signed cone decomposition from a chart center: faces are flat in the
    projective chart, and each cone's volume is the quadrature of the
    radial chart-density integral over the face.  Absolute quadrature
    error is bounded by tol (level-synchronous adaptive subdivision).
    """
    if not m.is_closed:
        raise GeometryError("enclosed volume requires a closed surface")
    coords = _chart_coords(m, center)
    tris = np.array(m.triangles)
    a, b, c = (coords[tris[:, i]] for i in range(3))
    budget = np.full(len(tris), tol / max(1, len(tris)))
    total = 0.0
    for depth in range(31):
        coarse = _cone_rule_vec(m.kind, a, b, c)
        ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
        kids = [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        fine = sum(_cone_rule_vec(m.kind, *kid) for kid in kids)
        # budget floor: once the local estimate reaches rounding noise the
        # subdivision cannot improve it further
        floor = 1e-14 * (np.abs(fine) + np.abs(coarse)) + 1e-19
        done = (np.abs(fine - coarse) <= np.maximum(budget, floor)) \
            | (depth == 30)
        total += float(fine[done].sum())
        if np.all(done):
            break
        keep = ~done
        if int(keep.sum()) * 4 > 2_000_000:
            raise GeometryError(
                "volume quadrature is not converging (surface passes too "
                "close to the cone center?); recenter with an explicit "
                "interior point")
        a = np.concatenate([k[0][keep] for k in kids])
        b = np.concatenate([k[1][keep] for k in kids])
        c = np.concatenate([k[2][keep] for k in kids])
        budget = np.tile(budget[keep] / 4.0, 4)
    return total


def _seg_seg_distance(p0, p1, q0, q1) -> float:
    u, v, w = p1 - p0, q1 - q0, p0 - q0
    a, b, c = float(u @ u), float(u @ v), float(v @ v)
    d, e = float(u @ w), float(v @ w)
    den = a * c - b * b
    if den > 1e-15:
        s = min(1.0, max(0.0, (b * e - c * d) / den))
    else:
        s = 0.0
    t = (b * s + e) / c if c > 1e-15 else 0.0
    t = min(1.0, max(0.0, t))
    s = min(1.0, max(0.0, (b * t - d) / a)) if a > 1e-15 else 0.0
    return float(np.linalg.norm(p0 + s * u - (q0 + t * v)))


def _point_tri_distance(p, a, b, c) -> float:
    n = np.cross(b - a, c - a)
    nn = float(n @ n)
    if nn < 1e-30:
        return min(_seg_seg_distance(p, p, a, b),
                   _seg_seg_distance(p, p, b, c),
                   _seg_seg_distance(p, p, a, c))
    # barycentric test of the in-plane projection
    w = p - a
    proj = p - (float(w @ n) / nn) * n
    v0, v1, v2 = b - a, c - a, proj - a
    d00, d01 = float(v0 @ v0), float(v0 @ v1)
    d11 = float(v1 @ v1)
    d20, d21 = float(v2 @ v0), float(v2 @ v1)
    den = d00 * d11 - d01 * d01
    if den > 1e-30:
        bv = (d11 * d20 - d01 * d21) / den
        bw = (d00 * d21 - d01 * d20) / den
        if bv >= 0 and bw >= 0 and bv + bw <= 1:
            return abs(float(w @ n)) / math.sqrt(nn)
    return min(_seg_seg_distance(p, p, a, b),
               _seg_seg_distance(p, p, b, c),
               _seg_seg_distance(p, p, a, c))


def _seg_tri_distance(p0, p1, a, b, c) -> float:
    n = np.cross(b - a, c - a)
    s0, s1 = float(n @ (p0 - a)), float(n @ (p1 - a))
    if s0 * s1 < 0:  # segment crosses the supporting plane
        t = s0 / (s0 - s1)
        x = p0 + t * (p1 - p0)
        if _point_tri_distance(x, a, b, c) < 1e-12 * (1 + np.linalg.norm(x)):
            return 0.0
    return min(_point_tri_distance(p0, a, b, c),
               _point_tri_distance(p1, a, b, c),
               _seg_seg_distance(p0, p1, a, b),
               _seg_seg_distance(p0, p1, b, c),
               _seg_seg_distance(p0, p1, a, c))


def _tri_tri_distance(t1: np.ndarray, t2: np.ndarray) -> float:
    best = math.inf
    for s in range(3):
        best = min(best,
                   _seg_tri_distance(t1[s], t1[(s + 1) % 3], *t2),
                   _seg_tri_distance(t2[s], t2[(s + 1) % 3], *t1))
        if best == 0.0:
            break
    return best


@dataclass(frozen=True)
class IntersectionReport:
    intersects: bool
    witness: tuple[tuple[int, int, int], tuple[int, int, int]] | None
    clearance: float


def self_intersects(m: TriMesh, tol: float = 1e-9,
                    center: Point | None = None) -> IntersectionReport:
    """Tolerance-based self-intersection test over vertex-disjoint triangle
    pairs, performed on the flat triangles of a projective chart."""
    centers: list[Point | None] = [center] if center is not None else \
        [None] + list(m.vertices)
    coords = None
    for cand in centers:
        try:
            coords = _chart_coords(m, cand)
            break
        except ChartDomainError:
            continue
    if coords is None:
        raise ChartDomainError("no admissible projective chart center found "
                               "for the self-intersection test")
    tris = [coords[list(t)] for t in m.triangles]
    lo = np.array([t.min(axis=0) for t in tris])
    hi = np.array([t.max(axis=0) for t in tris])
    clearance = math.inf
    witness = None
    for i in range(len(tris)):
        for j in range(i + 1, len(tris)):
            if set(m.triangles[i]) & set(m.triangles[j]):
                continue
            if np.any(lo[j] > hi[i] + tol) or np.any(lo[i] > hi[j] + tol):
                continue
            d = _tri_tri_distance(tris[i], tris[j])
            if d < clearance:
                clearance = d
                witness = (m.triangles[i], m.triangles[j])
    return IntersectionReport(intersects=clearance < tol,
                              witness=witness if clearance < tol else None,
                              clearance=clearance)


def surgery_replace(host: TriMesh, removed: set, patch: TriMesh,
                    correspondence: dict[str, str]) -> TriMesh:
    """Replace a disk of host triangles by a patch mesh whose boundary
    matches the hole boundary through the given patch-label -> host-label
    correspondence."""
    removed = {tuple(t) for t in removed}
    for t in removed:
        if t not in host.triangles:
            raise GeometryError(f"triangle {t} not in host mesh")
    kept = [t for t in host.triangles if tuple(t) not in removed]
    hole = TriMesh(kind=host.kind, vertices=host.vertices,
                   triangles=tuple(sorted(removed)), labels=host.labels)
    hole_cycle = [host.labels[i] for i in hole.boundary_cycle()]
    patch_cycle = [patch.labels[i] for i in patch.boundary_cycle()]
    if len(hole_cycle) != len(patch_cycle):
        raise CongruenceError(
            f"boundary length mismatch: hole {len(hole_cycle)}, patch "
            f"{len(patch_cycle)}")
    mapped = [correspondence.get(lab) for lab in patch_cycle]
    if any(lab is None for lab in mapped):
        raise CongruenceError("correspondence does not cover the patch "
                              "boundary")
    # the patch inherits the removed disk's orientation, so its boundary
    # traverses the hole boundary in the same direction
    if set(mapped) != set(hole_cycle):
        raise CongruenceError("patch boundary does not map onto the hole "
                              "boundary")
    shift = hole_cycle.index(mapped[0])
    if mapped != hole_cycle[shift:] + hole_cycle[:shift]:
        rev = list(reversed(mapped))
        shift2 = hole_cycle.index(rev[0])
        if rev == hole_cycle[shift2:] + hole_cycle[:shift2]:
            raise GeometryError("patch orientation conflicts with the host "
                                "orientation along the hole boundary")
        raise CongruenceError("patch boundary cycle order does not match "
                              "the hole boundary")
    residual = max(
        distance(patch.point(pl), host.point(correspondence[pl]))
        for pl in patch_cycle)
    if residual > 1e-9:
        raise CongruenceError(
            f"patch boundary misfit: max vertex residual {residual:.3e}")
    # assemble: host vertices still in use + patch interior vertices
    used = {i for t in kept for i in t}
    boundary_host = {correspondence[pl] for pl in patch_cycle}
    used |= {host.index_of(lab) for lab in boundary_host}
    old_to_new: dict[int, int] = {}
    vertices: list[Point] = []
    labels: list[str] = []
    for i in sorted(used):
        old_to_new[i] = len(vertices)
        vertices.append(host.vertices[i])
        labels.append(host.labels[i])
    patch_to_new: dict[int, int] = {}
    for i, lab in enumerate(patch.labels):
        if lab in correspondence and lab in patch_cycle:
            patch_to_new[i] = old_to_new[host.index_of(correspondence[lab])]
        else:
            if lab in labels:
                raise GeometryError(
                    f"patch interior label {lab!r} collides with a host "
                    "label")
            patch_to_new[i] = len(vertices)
            vertices.append(patch.vertices[i])
            labels.append(lab)
    triangles = [tuple(old_to_new[i] for i in t) for t in kept]
    triangles += [tuple(patch_to_new[i] for i in t) for t in patch.triangles]
    return build_mesh(host.kind, vertices, triangles, labels)


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def export_mesh(m: TriMesh, chart: Chart, path: str) -> None:
    """OFF-format export in chart coordinates, vertices ordered by label."""
    order = sorted(range(len(m.labels)), key=lambda i: m.labels[i])
    rank = {old: new for new, old in enumerate(order)}
    lines = ["OFF", f"{len(m.vertices)} {len(m.triangles)} 0"]
    for i in order:
        x = chart_to(m.vertices[i], chart)
        lines.append("# label " + m.labels[i])
        lines.append(" ".join(f"{v:.17g}" for v in x))
    for t in sorted(tuple(rank[i] for i in t) for t in m.triangles):
        lines.append("3 " + " ".join(str(i) for i in t))
    _atomic_write(path, "\n".join(lines) + "\n")


def import_mesh(path: str, chart: Chart) -> TriMesh:
    with open(path) as f:
        raw = [ln.strip() for ln in f if ln.strip()]
    if raw[0] != "OFF":
        raise GeometryError("not an OFF file")
    nv, nf, _ = (int(x) for x in raw[1].split())
    labels: list[str] = []
    vertices: list[Point] = []
    pos = 2
    while len(vertices) < nv:
        line = raw[pos]
        pos += 1
        if line.startswith("# label "):
            labels.append(line[len("# label "):])
            continue
        if line.startswith("#"):
            continue
        x = np.array([float(v) for v in line.split()])
        if len(labels) < len(vertices) + 1:
            labels.append(f"v{len(vertices)}")
        vertices.append(chart_from(x, chart))
    triangles = []
    while len(triangles) < nf:
        line = raw[pos]
        pos += 1
        if line.startswith("#"):
            continue
        parts = [int(v) for v in line.split()]
        if parts[0] != 3:
            raise GeometryError("only triangle faces are supported")
        triangles.append(tuple(parts[1:4]))
    return build_mesh(chart.kind, vertices, triangles, labels)


def edge_table_csv(m: TriMesh, path: str) -> None:
    rows = [["edge_label", "length", "dihedral"]]
    for rec in edge_table(m):
        rows.append(["-".join(rec.endpoints), f"{rec.length:.17g}",
                     f"{rec.dihedral:.17g}"])
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)),
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            csv.writer(f).writerows(rows)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def oriented_positive(m: TriMesh, center: Point | None = None) -> TriMesh:
    """The mesh with orientation flipped if needed so the enclosed volume
    is positive (outward orientation)."""
    if enclosed_volume(m, tol=1e-4, center=center) >= 0:
        return m
    return build_mesh(m.kind, m.vertices,
                      [(t[0], t[2], t[1]) for t in m.triangles], m.labels)


def tetrahedron_mesh(kind: SpaceKind, pts: list[Point],
                     labels: list[str] | None = None) -> TriMesh:
    labels = labels or ["p0", "p1", "p2", "p3"]
    m = build_mesh(kind, pts, [(0, 1, 2), (0, 3, 1), (1, 3, 2), (0, 2, 3)],
                   labels)
    return oriented_positive(m)


def refine_once(m: TriMesh, center: Point | None = None) -> TriMesh:
    """4-split every triangle at chart-straight edge midpoints.  Faces stay
    on the same geodesic planes, so the surface is unchanged."""
    c = center if center is not None else mesh_chart_center(m)
    chart = projective_chart(m.kind, c)
    coords = [chart_to(p, chart) for p in m.vertices]
    vertices = list(m.vertices)
    labels = list(m.labels)
    mid: dict[frozenset, int] = {}

    def midpoint(i, j):
        key = frozenset((i, j))
        if key not in mid:
            x = 0.5 * (coords[i] + coords[j])
            mid[key] = len(vertices)
            vertices.append(chart_from(x, chart))
            labels.append(f"m.{min(i, j)}.{max(i, j)}")
        return mid[key]

    triangles = []
    for i, j, k in m.triangles:
        ij, jk, ki = midpoint(i, j), midpoint(j, k), midpoint(k, i)
        triangles += [(i, ij, ki), (ij, j, jk), (ki, jk, k), (ij, jk, ki)]
    return build_mesh(m.kind, vertices, triangles, labels)


def split_face_at_centroid(m: TriMesh, tri_index: int) -> TriMesh:
    """Insert a vertex at the chart centroid of one face and fan it.  The
    new vertex lies on the face's geodesic plane, so the surface is
    unchanged."""
    c = mesh_chart_center(m)
    chart = projective_chart(m.kind, c)
    i, j, k = m.triangles[tri_index]
    x = (chart_to(m.vertices[i], chart) + chart_to(m.vertices[j], chart)
         + chart_to(m.vertices[k], chart)) / 3.0
    vertices = list(m.vertices) + [chart_from(x, chart)]
    labels = list(m.labels) + [f"c.{tri_index}"]
    n = len(vertices) - 1
    triangles = [t for t_i, t in enumerate(m.triangles) if t_i != tri_index]
    triangles += [(i, j, n), (j, k, n), (k, i, n)]
    return build_mesh(m.kind, vertices, triangles, labels)


def _icosphere_directions(subdiv: int) -> tuple[list, list]:
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    raw = [(-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
           (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
           (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1)]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in raw]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    for _ in range(subdiv):
        cache: dict[frozenset, int] = {}
        new_faces = []

        def mid(i, j):
            key = frozenset((i, j))
            if key not in cache:
                v = verts[i] + verts[j]
                cache[key] = len(verts)
                verts.append(v / np.linalg.norm(v))
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [(a, ab, ca), (ab, b, bc), (ca, bc, c),
                          (ab, bc, ca)]
        faces = new_faces
    return verts, faces


def geodesic_ball_mesh(kind: SpaceKind, center: Point, radius: float,
                       subdiv: int = 3) -> TriMesh:
    """Triangulated geodesic sphere of the given radius about a center."""
    from artifact.core import canonical_tangent_frame

    if kind is SpaceKind.SPHERICAL and radius >= math.pi / 2:
        raise DomainError("ball must fit in an open hemisphere")
    u1, u2, u3 = canonical_tangent_frame(center)
    dirs, faces = _icosphere_directions(subdiv)
    frame = np.vstack([u1, u2, u3])
    if kind is SpaceKind.HYPERBOLIC:
        cs, sn = math.cosh(radius), math.sinh(radius)
    else:
        cs, sn = math.cos(radius), math.sin(radius)
    coords = cs * center.coords + sn * (np.array(dirs) @ frame)
    vertices = [Point.normalized(x, kind) for x in coords]
    labels = [f"s{i}" for i in range(len(vertices))]
    return oriented_positive(build_mesh(kind, vertices, faces, labels),
                             center=center)


def point_in_mesh(m: TriMesh, p: Point, center: Point | None = None,
                  rng: np.random.Generator | None = None) -> bool:
    """Ray-casting point-in-surface test in a projective chart."""
    coords = _chart_coords(m, center)
    c = center if center is not None else mesh_chart_center(m)
    chart = projective_chart(m.kind, c)
    x = chart_to(p, chart)
    tris = [coords[list(t)] for t in m.triangles]
    rng = rng or np.random.default_rng(7)
    for _ in range(20):
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        count = 0
        ok = True
        for t in tris:
            n = np.cross(t[1] - t[0], t[2] - t[0])
            dn = float(n @ d)
            if abs(dn) < 1e-12:
                ok = False
                break
            s = float(n @ (t[0] - x)) / dn
            if s <= 1e-12:
                continue
            hit = x + s * d
            v0, v1, v2 = t[1] - t[0], t[2] - t[0], hit - t[0]
            d00, d01 = float(v0 @ v0), float(v0 @ v1)
            d11 = float(v1 @ v1)
            d20, d21 = float(v2 @ v0), float(v2 @ v1)
            den = d00 * d11 - d01 * d01
            bv = (d11 * d20 - d01 * d21) / den
            bw = (d00 * d21 - d01 * d20) / den
            margin = min(bv, bw, 1 - bv - bw)
            if -1e-9 < margin < 1e-9:
                ok = False  # edge graze; re-cast
                break
            if margin > 0:
                count += 1
        if ok:
            return count % 2 == 1
    raise GeometryError("ray casting failed to find a non-degenerate "
                        "direction")
