"""Command-line front end.

Subcommands
-----------
build           construct the meshes of a deformation family at one radius
                and export them with a summary.
sweep           sample a family across its interval, write the measurement
                CSV, and judge which quantities stay constant.
tile            assemble a tiling window (hyperbolic layer tiling or the
                spherical 12-cell tiling), export the cells, and verify the
                face-to-face adjacencies.
verify-schlafli audit the differential volume formula on an angle-varying
                tetrahedron family or on a fixed-dihedral family.

Exit codes: 0 success; 1 a verification failed determinately; 2 config or
schema error; 3 family infeasible; 4 indeterminate verdict (tolerance gap);
5 tile fit/margin violation (message names the offending cell word).
All outputs are deterministic for a fixed config and seed, and files are
written atomically.
"""

from __future__ import annotations

import json
import math
import os
import sys

import click
import numpy as np

from .core import (
    Chart,
    ChartTag,
    DomainError,
    GeometryError,
    SpaceKind,
    projective_chart,
)
from .mesh import (
    _atomic_write,
    edge_table,
    enclosed_volume,
    export_mesh,
    mesh_chart_center,
    self_intersects,
)
from .construction import (
    ConfigSchemaError,
    DeformationFamily,
    build_disk_N,
    build_host_tetrahedron,
    build_octahedron_M,
    build_P,
    intro_family,
    params_from_dict,
)
from .analysis import (
    Verdict,
    constancy_verdict,
    schlafli_residual,
    sweep,
    sweep_csv,
    validation_tetra_family,
)
from .tilings import (
    boroczky_frame,
    boroczky_window,
    spherical_12_tiling,
    window_export,
    window_overlaps,
)

EXIT_FAIL = 1
EXIT_SCHEMA = 2
EXIT_INFEASIBLE = 3
EXIT_INDETERMINATE = 4
EXIT_TILE_FIT = 5


def _die(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config(path: str) -> dict:
    try:
        with open(path) as f:
            doc = json.load(f)
    except OSError as exc:
        _die(EXIT_SCHEMA, f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        _die(EXIT_SCHEMA,
             f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}")
    if not isinstance(doc, dict):
        _die(EXIT_SCHEMA, f"{path}: top-level value must be a JSON object")
    return doc


def _family_from_config(doc: dict):
    """A family plus its describing parameter block (None for the rigid
    contrast family)."""
    if doc.get("family") == "intro":
        try:
            kind = SpaceKind(doc.get("kind", "hyperbolic"))
        except ValueError:
            _die(EXIT_SCHEMA, f"kind must be 'hyperbolic' or 'spherical', "
                 f"got {doc.get('kind')!r}")
        return intro_family(kind), None
    body = {k: v for k, v in doc.items()
            if k not in ("targets", "r", "expect", "h")}
    try:
        params = params_from_dict(body)
    except ConfigSchemaError as exc:
        _die(EXIT_SCHEMA, str(exc))
    fam = DeformationFamily(params=params,
                            interval=(params.r_min, params.r_max))
    return fam, params


def _chart_for(mesh, name: str | None) -> Chart:
    if name is None or name == "projective":
        return projective_chart(mesh.kind, mesh_chart_center(mesh))
    try:
        tag = ChartTag(name)
    except ValueError:
        _die(EXIT_SCHEMA, f"unknown chart {name!r}; choose one of "
             f"{['projective'] + [t.value for t in ChartTag]}")
    try:
        return Chart(tag, mesh.kind)
    except GeometryError as exc:
        _die(EXIT_SCHEMA, str(exc))


def _write_json(path: str, doc) -> None:
    _atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


@click.group()
def main():
    """Construct, deform, tile, and numerically audit polyhedra in
    hyperbolic and spherical 3-space."""


# ---------------------------------------------------------------------------
# build
# ---------------------------------------------------------------------------

_BUILDERS = {
    "T": build_host_tetrahedron,
    "M": build_octahedron_M,
    "N": build_disk_N,
    "P": build_P,
}


@main.command()
@click.option("--config", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
@click.option("--chart", default="projective", show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
def build(config, out, chart, seed):
    """Build the requested meshes at a single radius and export them."""
    doc = _load_config(config)
    fam, params = _family_from_config(doc)
    lo, hi = fam.interval
    r = doc.get("r", 0.5 * (lo + hi))
    if not isinstance(r, (int, float)):
        _die(EXIT_SCHEMA, "r must be a number")
    targets = doc.get("targets", list(_BUILDERS) if params is not None
                      else ["intro"])
    if not isinstance(targets, list) or not targets:
        _die(EXIT_SCHEMA, "targets must be a nonempty list")
    os.makedirs(out, exist_ok=True)
    summary = {}
    for name in targets:
        try:
            if params is None:
                if name != "intro":
                    _die(EXIT_SCHEMA, f"unknown target {name!r} for the "
                         "contrast family (only 'intro')")
                mesh = fam.generate(float(r))
            else:
                if name not in _BUILDERS:
                    _die(EXIT_SCHEMA, f"unknown target {name!r}; choose "
                         f"from {sorted(_BUILDERS)}")
                builder = _BUILDERS[name]
                mesh = builder(params) if name == "T" \
                    else builder(params, float(r))
        except DomainError as exc:
            _die(EXIT_INFEASIBLE, f"target {name}: {exc}")
        report = self_intersects(mesh)
        export_mesh(mesh, _chart_for(mesh, chart),
                    os.path.join(out, f"{name}.off"))
        summary[name] = {
            "vertices": len(mesh.vertices),
            "triangles": len(mesh.triangles),
            "euler": mesh.euler_characteristic(),
            "closed": mesh.is_closed,
            "embedded": not report.intersects,
        }
    _write_json(os.path.join(out, "summary.json"), {"r": r, **summary})
    click.echo(f"built {', '.join(targets)} at r = {r:.6g} into {out}")


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _expectations(doc: dict, report) -> dict[str, Verdict]:
    """Mapping column -> required verdict for exit-code purposes."""
    mode = doc.get("expect", "all-constant" if doc.get("family") == "intro"
                   else "deformation")
    if mode == "all-constant":
        return {name: Verdict.CONSTANT for name in report.column_names()}
    if mode != "deformation":
        _die(EXIT_SCHEMA,
             f"expect must be 'deformation' or 'all-constant', got {mode!r}")
    wanted = {"volume": Verdict.CONSTANT, "area": Verdict.VARYING,
              "tmc": Verdict.VARYING, "curvature:y": Verdict.VARYING}
    for name in report.column_names():
        if name.startswith("dihedral:"):
            wanted[name] = Verdict.CONSTANT
    return wanted


@main.command()
@click.option("--config", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
@click.option("--samples", default=12, show_default=True, type=int)
def sweep_cmd(config, out, samples):
    """Sweep a family over its interval and judge constancy verdicts."""
    doc = _load_config(config)
    fam, params = _family_from_config(doc)
    tols = dict(doc.get("tolerances", {}))
    tol_constant = float(tols.get("constant", 1e-9))
    tol_varying = float(tols.get("varying", 1e-3))
    vol_quad_tol = float(tols.get("volumeQuadrature", 1e-7))
    vol_constant = float(tols.get("volumeConstant", 10.0 * vol_quad_tol))
    if min(tol_constant, tol_varying, vol_quad_tol, vol_constant) <= 0:
        _die(EXIT_SCHEMA, "all tolerances must be positive")
    try:
        report = sweep(fam, samples, volume_tol=vol_quad_tol)
    except DomainError as exc:
        _die(EXIT_SCHEMA, str(exc))
    if not report.samples:
        _die(EXIT_INFEASIBLE, "family infeasible everywhere: " +
             "; ".join(msg for _, msg in report.failures[:3]))
    os.makedirs(out, exist_ok=True)
    sweep_csv(report, os.path.join(out, "sweep.csv"))
    wanted = _expectations(doc, report)
    verdicts, ok, indeterminate = {}, True, False
    for name in report.column_names():
        lo_tol = vol_constant if name == "volume" else tol_constant
        try:
            v = constancy_verdict(report, name, lo_tol, tol_varying)
        except DomainError as exc:
            _die(EXIT_SCHEMA, str(exc))
        verdicts[name] = v.value
        if name in wanted:
            if v is Verdict.INDETERMINATE:
                indeterminate = True
            elif v is not wanted[name]:
                ok = False
    _write_json(os.path.join(out, "verdicts.json"), {
        "samples": len(report.samples),
        "failures": [[r, msg] for r, msg in report.failures],
        "embedded": all(s.embedded for s in report.samples),
        "verdicts": verdicts,
        "expected": {k: v.value for k, v in wanted.items()},
    })
    if report.failures:
        _die(EXIT_INFEASIBLE,
             f"{len(report.failures)} of {samples} samples infeasible")
    if indeterminate:
        _die(EXIT_INDETERMINATE, "indeterminate verdicts; widen the gap "
             "between tolerances.constant and tolerances.varying")
    if not ok or not all(s.embedded for s in report.samples):
        _die(EXIT_FAIL, "sweep verdicts do not match the expected pattern; "
             "see verdicts.json")
    click.echo(f"sweep ok: {len(report.samples)} samples, "
               f"verdicts as expected, wrote {out}")


main.add_command(sweep_cmd, name="sweep")


# ---------------------------------------------------------------------------
# tile
# ---------------------------------------------------------------------------

def _int_list(doc, key, default):
    value = doc.get(key, default)
    if not isinstance(value, list) or \
            not all(isinstance(v, int) for v in value):
        _die(EXIT_SCHEMA, f"{key} must be a list of integers")
    return value


def _tile_family(doc: dict):
    block = doc.get("family")
    if block is None:
        return None
    if not isinstance(block, dict):
        _die(EXIT_SCHEMA, "family must be a parameter object")
    try:
        params = params_from_dict(block)
    except ConfigSchemaError as exc:
        _die(EXIT_SCHEMA, str(exc))
    return DeformationFamily(params=params,
                             interval=(params.r_min, params.r_max))


def _dihedral_tables(window) -> dict:
    return {word: {frozenset(rec.endpoints): rec.dihedral
                   for rec in edge_table(m)}
            for word, m in window.cells}


@main.command()
@click.option("--config", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
@click.option("--samples", default=None, type=int,
              help="Number of radii sampled for modified windows.")
@click.option("--seed", default=0, show_default=True, type=int)
def tile(config, out, samples, seed):
    """Assemble a tiling window, export it, and verify the adjacencies."""
    doc = _load_config(config)
    tiling = doc.get("tiling")
    if tiling not in ("boroczky", "twelve-cell"):
        _die(EXIT_SCHEMA,
             f"tiling must be 'boroczky' or 'twelve-cell', got {tiling!r}")
    fam = _tile_family(doc)
    tol = float(doc.get("adjacencyTolerance", 1e-9))
    if tol <= 0:
        _die(EXIT_SCHEMA, "adjacencyTolerance must be positive")

    if fam is None:
        radii = [None]
    else:
        lo, hi = fam.interval
        span = hi - lo
        n = samples if samples is not None else int(doc.get("rSamples", 5))
        if n < 1:
            _die(EXIT_SCHEMA, "need at least one radius sample")
        radii = [lo + span * (i + 0.5) / n for i in range(n)]

    def make_window(r):
        if tiling == "boroczky":
            ks = _int_list(doc, "k", [0, 1])
            ps = _int_list(doc, "p", [0, 1])
            qs = _int_list(doc, "q", [0, 1])
            if not (ks and ps and qs):
                return None
            return boroczky_window(boroczky_frame(), ks, ps, qs,
                                   family=fam, r=r)
        return spherical_12_tiling(family=fam, r=r)

    os.makedirs(out, exist_ok=True)
    runs, tables0 = [], None
    drift = 0.0
    for r in radii:
        try:
            window = make_window(r)
        except DomainError as exc:
            word = "phi^0.psi^0.chi^0" if tiling == "boroczky" else "phi1.N"
            if "margin" in str(exc) or "fit" in str(exc):
                _die(EXIT_TILE_FIT, f"cell {word}: {exc}")
            _die(EXIT_INFEASIBLE, f"cell {word}: {exc}")
        if window is None:  # vacuous window
            _write_json(os.path.join(out, "adjacency.json"),
                        {"cells": [], "adjacency": []})
            _write_json(os.path.join(out, "verdict.json"),
                        {"tiling": tiling, "runs": [], "passed": True})
            click.echo("empty window: nothing to verify")
            return
        residuals = [rec[4] for rec in window.adjacency]
        overlap = window_overlaps(window)
        runs.append({
            "r": r,
            "cells": len(window.cells),
            "adjacencies": len(window.adjacency),
            "maxResidual": max(residuals, default=0.0),
            "overlap": overlap,
        })
        tables = _dihedral_tables(window)
        if tables0 is None:
            tables0 = tables
            window_export(window, out)
        else:
            for word, table in tables.items():
                base = tables0[word]
                if base.keys() != table.keys():
                    _die(EXIT_FAIL, f"cell {word}: edge combinatorics "
                         "changed across radii")
                drift = max(drift, max(abs(table[k] - base[k])
                                       for k in base))
    passed = all(run["maxResidual"] < tol and not run["overlap"]
                 for run in runs) and drift < 1e-9
    _write_json(os.path.join(out, "verdict.json"), {
        "tiling": tiling,
        "runs": runs,
        "dihedralDrift": drift,
        "passed": passed,
    })
    if not passed:
        _die(EXIT_FAIL, "tiling verification failed; see verdict.json")
    click.echo(f"tiling ok: {len(runs)} window(s), "
               f"max residual {max(r['maxResidual'] for r in runs):.3e}, "
               f"dihedral drift {drift:.3e}, wrote {out}")


# ---------------------------------------------------------------------------
# verify-schlafli
# ---------------------------------------------------------------------------

@main.command("verify-schlafli")
@click.option("--config", default=None, type=click.Path(),
              help="Family parameters; omitted = tetrahedron calibration "
                   "families for both geometries.")
@click.option("--out", required=True, type=click.Path())
def verify_schlafli(config, out):
    """Audit the differential volume formula by central differences."""
    checks, passed = [], True
    if config is None:
        jobs = [(validation_tetra_family(kind), kind.value, 0.0, 1e-4,
                 "calibration")
                for kind in (SpaceKind.HYPERBOLIC, SpaceKind.SPHERICAL)]
    else:
        doc = _load_config(config)
        fam, params = _family_from_config(doc)
        if params is None:
            _die(EXIT_SCHEMA, "the contrast family has no radius parameter "
                 "to differentiate against")
        lo, hi = fam.interval
        h = float(doc.get("h", 1e-4))
        jobs = [(fam, params.kind.value, 0.5 * (lo + hi), h, "family")]
    for fam, kind, r0, h, role in jobs:
        vol_tol = 1e-12 if role == "calibration" else 1e-9
        try:
            c1 = schlafli_residual(fam, r0, h, volume_tol=vol_tol)
            c2 = schlafli_residual(fam, r0, 0.5 * h, volume_tol=vol_tol)
        except DomainError as exc:
            _die(EXIT_INFEASIBLE, str(exc))
        if role == "calibration":
            ok = c1.residual < 1e-4 and \
                c2.residual <= c1.residual / 3.0 + 1e-11
        else:  # fixed-dihedral family: the residual is |dV/dr|, near zero
            ok = c1.residual < 1e-5
        passed = passed and ok
        checks.append({
            "kind": kind, "role": role, "r": r0, "h": h,
            "dvol": c1.dvol, "edgeSum": c1.edge_sum,
            "residual": c1.residual, "residualHalfStep": c2.residual,
            "ok": ok,
        })
    os.makedirs(out, exist_ok=True)
    _write_json(os.path.join(out, "schlafli.json"),
                {"checks": checks, "passed": passed})
    if not passed:
        _die(EXIT_FAIL, "differential volume audit failed; "
             "see schlafli.json")
    click.echo("schlafli audit ok: " + ", ".join(
        f"{c['kind']}/{c['role']} residual {c['residual']:.3e}"
        for c in checks))


if __name__ == "__main__":
    main()
