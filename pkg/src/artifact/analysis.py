"""Parameter sweeps, constancy verdicts, and Schläfli validation.

A sweep samples a deformation family and records every audited quantity:
enclosed volume, surface area, total mean curvature, per-vertex curvature,
per-edge dihedral angle and mean-curvature summand, and embeddedness.
Verdicts classify each column as constant or varying against explicit
tolerances.  The Schläfli residual checks the differential volume formula
dV/dr = -(1/2) Σ |ℓ| dα/dr (sign flipped in the spherical space) with
central differences.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from artifact.core import (
    DomainError,
    GeometryError,
    Point,
    SpaceKind,
    canonical_tangent_frame,
    geodesic_point,
)
from artifact.mesh import (
    TriMesh,
    _atomic_write,
    build_mesh,
    edge_table,
    enclosed_volume,
    oriented_positive,
    self_intersects,
    surface_area,
    total_mean_curvature,
    vertex_gauss_curvature,
)

__all__ = [
    "SweepSample",
    "SweepReport",
    "SchlafliCheck",
    "Verdict",
    "sweep",
    "constancy_verdict",
    "schlafli_residual",
    "validation_tetra_family",
    "sweep_csv",
]


@dataclass(frozen=True)
class SweepSample:
    r: float
    volume: float
    area: float
    tmc: float
    curvatures: dict
    dihedrals: dict
    summands: dict
    embedded: bool


@dataclass(frozen=True)
class SweepReport:
    samples: list
    failures: list
    tolerances: dict

    def column_names(self) -> list:
        if not self.samples:
            return []
        s0 = self.samples[0]
        names = ["volume", "area", "tmc"]
        names += [f"curvature:{k}" for k in sorted(s0.curvatures)]
        names += [f"dihedral:{k}" for k in sorted(s0.dihedrals)]
        names += [f"summand:{k}" for k in sorted(s0.summands)]
        return names

    def column(self, name: str) -> np.ndarray:
        if not self.samples:
            raise GeometryError("empty sweep report")
        if name in ("volume", "area", "tmc"):
            return np.array([getattr(s, name) for s in self.samples])
        for prefix, attr in (("curvature:", "curvatures"),
                             ("dihedral:", "dihedrals"),
                             ("summand:", "summands")):
            if name.startswith(prefix):
                key = name[len(prefix):]
                try:
                    return np.array([getattr(s, attr)[key]
                                     for s in self.samples])
                except KeyError:
                    raise GeometryError(f"unknown column {name!r}") from None
        raise GeometryError(f"unknown column {name!r}")


def _edge_key(endpoints) -> str:
    return "-".join(sorted(endpoints))


def _measure(mesh: TriMesh, r: float, volume_tol: float,
             center: Point | None) -> SweepSample:
    records = edge_table(mesh)
    return SweepSample(
        r=r,
        volume=enclosed_volume(mesh, tol=volume_tol, center=center),
        area=surface_area(mesh),
        tmc=total_mean_curvature(mesh),
        curvatures={lab: vertex_gauss_curvature(mesh, lab)
                    for lab in mesh.labels},
        dihedrals={_edge_key(rec.endpoints): rec.dihedral
                   for rec in records},
        summands={_edge_key(rec.endpoints):
                  (math.pi - rec.dihedral) * rec.length for rec in records},
        embedded=not self_intersects(mesh, center=center).intersects,
    )


def _family_center(family) -> Point | None:
    getter = getattr(family, "volume_center", None)
    return getter() if callable(getter) else None


def sweep(family, n: int, volume_tol: float = 1e-7) -> SweepReport:
    """Measure every audited quantity at n uniformly spaced parameters."""
    if n < 3:
        raise DomainError("a sweep needs at least 3 samples")
    lo, hi = family.interval
    center = _family_center(family)
    samples, failures = [], []
    for r in np.linspace(lo, hi, n):
        r = float(r)
        try:
            samples.append(_measure(family.generate(r), r, volume_tol,
                                    center))
        except GeometryError as exc:
            failures.append((r, str(exc)))
    return SweepReport(samples=samples, failures=failures,
                       tolerances={"volume": volume_tol})


class Verdict(enum.Enum):
    CONSTANT = "constant"
    VARYING = "varying"
    INDETERMINATE = "indeterminate"


def constancy_verdict(report: SweepReport, column: str,
                      tol_constant: float, tol_varying: float) -> Verdict:
    if not tol_constant < tol_varying:
        raise DomainError("need tolConstant < tolVarying")
    spread = float(np.ptp(report.column(column)))
    if spread < tol_constant:
        return Verdict.CONSTANT
    if spread > tol_varying:
        return Verdict.VARYING
    return Verdict.INDETERMINATE


@dataclass(frozen=True)
class SchlafliCheck:
    r: float
    h: float
    dvol: float
    edge_sum: float
    residual: float


def schlafli_residual(family, r: float, h: float,
                      volume_tol: float = 1e-12) -> SchlafliCheck:
    """Central-difference audit of the differential volume formula."""
    lo, hi = family.interval
    if not (lo <= r - h and r + h <= hi):
        raise DomainError(f"[r-h, r+h] = [{r - h}, {r + h}] not inside "
                          f"[{lo}, {hi}]")
    if h < 1e-6:
        raise DomainError("step too small: volume noise dominates the "
                          "central difference below h = 1e-6")
    center = _family_center(family)
    m_lo, m_mid, m_hi = (family.generate(rr) for rr in (r - h, r, r + h))
    v_lo = enclosed_volume(m_lo, tol=volume_tol, center=center)
    v_hi = enclosed_volume(m_hi, tol=volume_tol, center=center)
    dvol = (v_hi - v_lo) / (2.0 * h)
    ang_lo = {_edge_key(rec.endpoints): rec.dihedral
              for rec in edge_table(m_lo)}
    ang_hi = {_edge_key(rec.endpoints): rec.dihedral
              for rec in edge_table(m_hi)}
    lengths = {_edge_key(rec.endpoints): rec.length
               for rec in edge_table(m_mid)}
    if ang_lo.keys() != ang_hi.keys() or ang_lo.keys() != lengths.keys():
        raise GeometryError("edge combinatorics changed across the step")
    edge_sum = sum(lengths[k] * (ang_hi[k] - ang_lo[k]) / (2.0 * h)
                   for k in lengths)
    kind = m_mid.kind
    sign = 1.0 if kind is SpaceKind.HYPERBOLIC else -1.0
    residual = abs(dvol + sign * 0.5 * edge_sum)
    return SchlafliCheck(r=r, h=h, dvol=dvol, edge_sum=edge_sum,
                         residual=residual)


@dataclass(frozen=True)
class _TetraFamily:
    """A tetrahedron with three fixed vertices and one sliding fast along a
    geodesic: its dihedral angles genuinely change, so the Schläfli sum is
    nonzero and exercises the volume engine."""

    kind: SpaceKind
    interval: tuple = (-0.04, 0.04)

    def generate(self, r: float) -> TriMesh:
        origin = Point(np.array([0.0, 0.0, 0.0, 1.0]), self.kind)
        u1, u2, u3 = canonical_tangent_frame(origin)
        a = geodesic_point(origin, u1, 0.7)
        b = geodesic_point(origin, -0.5 * u1 + 0.8660254037844386 * u2, 0.8)
        c = geodesic_point(origin, -0.5 * u1 - 0.8660254037844386 * u2, 0.75)
        apex0 = geodesic_point(origin, 0.2 * u1 + 0.9797958971132712 * u3,
                               0.9)
        drift = geodesic_point(apex0, u1, 3.0 * r) if r else apex0
        m = build_mesh(self.kind, [a, b, c, drift],
                       [(0, 1, 2), (0, 3, 1), (1, 3, 2), (2, 3, 0)],
                       ["A", "B", "C", "D"])
        return oriented_positive(m)

    def volume_center(self) -> Point | None:
        return None


def validation_tetra_family(kind: SpaceKind) -> _TetraFamily:
    return _TetraFamily(kind=kind)


def sweep_csv(report: SweepReport, path: str) -> None:
    """Write the sweep as CSV: r, embedded, then every column, 17
    significant digits, samples sorted by r."""
    names = report.column_names()
    lines = [",".join(["r", "embedded"] + names)]
    for s in sorted(report.samples, key=lambda s: s.r):
        row = [f"{s.r:.17g}", str(int(s.embedded))]
        for name in names:
            if name in ("volume", "area", "tmc"):
                val = getattr(s, name)
            else:
                prefix, key = name.split(":", 1)
                val = getattr(s, prefix + "s")[key]
            row.append(f"{val:.17g}")
        lines.append(",".join(row))
    _atomic_write(path, "\n".join(lines) + "\n")
