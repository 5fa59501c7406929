"""Tests for sweeps, verdicts, and the Schläfli residual."""

import math

import numpy as np
import pytest

from artifact.core import DomainError, GeometryError, SpaceKind
from artifact.construction import (
    DeformationFamily,
    bundled_params,
    intro_family,
)
from artifact.analysis import (
    SchlafliCheck,
    Verdict,
    constancy_verdict,
    schlafli_residual,
    sweep,
    sweep_csv,
    validation_tetra_family,
)

HYP = bundled_params("hyperbolic")
SPH = bundled_params("spherical")


def p_family(params):
    return DeformationFamily(params=params,
                             interval=(params.r_min, params.r_max))


def test_sweep_intro_family_all_constant():
    fam = intro_family(SpaceKind.HYPERBOLIC)
    rep = sweep(fam, 5)
    assert not rep.failures
    assert len(rep.samples) == 5
    assert all(s.embedded for s in rep.samples)
    for name in rep.column_names():
        assert constancy_verdict(rep, name, 1e-9, 1e-3) is Verdict.CONSTANT


@pytest.mark.parametrize("params", [HYP, SPH], ids=["hyp", "sph"])
def test_sweep_P_family_verdicts(params):
    rep = sweep(p_family(params), 8)
    assert not rep.failures
    assert all(s.embedded for s in rep.samples)
    assert [s.r for s in rep.samples] == sorted(s.r for s in rep.samples)
    for name in rep.column_names():
        if name.startswith("dihedral:"):
            assert constancy_verdict(rep, name, 1e-9, 1e-3) \
                is Verdict.CONSTANT
    assert constancy_verdict(rep, "volume", 1e-6, 1e-2) is Verdict.CONSTANT
    for name in ("area", "tmc", "curvature:y"):
        assert constancy_verdict(rep, name, 1e-9, 1e-3) is Verdict.VARYING


def test_verdict_stability_under_doubling():
    rep1 = sweep(p_family(HYP), 6)
    rep2 = sweep(p_family(HYP), 12)
    for name in ("volume", "area", "tmc", "curvature:y"):
        assert constancy_verdict(rep1, name, 1e-6, 1e-3) \
            is constancy_verdict(rep2, name, 1e-6, 1e-3)


def test_verdict_indeterminate_and_errors():
    rep = sweep(p_family(HYP), 4)
    spread = float(np.ptp(rep.column("area")))
    assert constancy_verdict(rep, "area", 0.5 * spread, 2.0 * spread) \
        is Verdict.INDETERMINATE
    with pytest.raises(GeometryError):
        rep.column("no-such-column")
    with pytest.raises(GeometryError):
        rep.column("curvature:nope")
    with pytest.raises(DomainError):
        constancy_verdict(rep, "area", 1e-3, 1e-6)  # tolerances reversed
    with pytest.raises(DomainError):
        sweep(p_family(HYP), 2)


def test_sweep_partial_failure_recorded():
    class Flaky:
        interval = (0.0, 1.0)

        def generate(self, r):
            if r > 0.5:
                raise DomainError("infeasible here")
            return intro_family(SpaceKind.SPHERICAL).generate(0.2 * r)

        def volume_center(self):
            return None

    rep = sweep(Flaky(), 5)
    assert len(rep.samples) == 3
    assert len(rep.failures) == 2
    assert all("infeasible" in msg for _, msg in rep.failures)


@pytest.mark.parametrize("kind", [SpaceKind.HYPERBOLIC, SpaceKind.SPHERICAL],
                         ids=["hyp", "sph"])
def test_schlafli_validation_family(kind):
    """The angle-varying tetrahedron family satisfies the differential
    volume formula, with second-order central-difference convergence."""
    fam = validation_tetra_family(kind)
    c1 = schlafli_residual(fam, 0.0, 1e-4)
    c2 = schlafli_residual(fam, 0.0, 5e-5)
    assert abs(c1.edge_sum) > 1e-3  # the angles really move
    assert c1.residual < 1e-4
    assert c2.residual <= 0.3 * c1.residual + 1e-11
    # the formula's sign convention is exercised, not just a zero identity
    sign = 1.0 if kind is SpaceKind.HYPERBOLIC else -1.0
    assert abs(c1.dvol + sign * 0.5 * c1.edge_sum) < 1e-4 * abs(c1.dvol)


@pytest.mark.parametrize("params", [HYP, SPH], ids=["hyp", "sph"])
def test_schlafli_on_P_family(params):
    """For the fixed-dihedral family every dα/dr vanishes, so the residual
    reduces to |dV/dr|, which is numerically zero."""
    fam = p_family(params)
    r0 = 0.5 * (params.r_min + params.r_max)
    c = schlafli_residual(fam, r0, 1e-4, volume_tol=1e-9)
    assert abs(c.edge_sum) < 1e-5
    assert c.residual < 1e-6


def test_schlafli_domain_errors():
    fam = validation_tetra_family(SpaceKind.HYPERBOLIC)
    with pytest.raises(DomainError):
        schlafli_residual(fam, 0.04, 1e-3)  # r + h outside the interval
    with pytest.raises(DomainError):
        schlafli_residual(fam, 0.0, 1e-8)  # step below the noise bound


def test_sweep_csv_round_trip(tmp_path):
    rep = sweep(intro_family(SpaceKind.SPHERICAL), 3)
    path = tmp_path / "sweep.csv"
    sweep_csv(rep, str(path))
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    assert header[:2] == ["r", "embedded"]
    assert header[2:] == rep.column_names()
    assert len(lines) == 1 + len(rep.samples)
    row = lines[1].split(",")
    assert float(row[header.index("volume")]) == rep.samples[0].volume
