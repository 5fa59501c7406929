"""Shared helpers for the test suite."""

import numpy as np

from artifact.core import (
    Isometry,
    Point,
    SpaceKind,
    canonical_tangent_frame,
    geodesic_point,
    isometry_from_frames,
)


def random_point(rng: np.random.Generator, kind: SpaceKind,
                 scale: float = 1.0) -> Point:
    """A random point within (roughly) distance *scale* of a base point."""
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    t = float(rng.uniform(0.0, scale))
    base = Point(np.array([0.0, 0.0, 0.0, 1.0]), kind)
    u = np.array([v[0], v[1], v[2], 0.0])
    return geodesic_point(base, u, t)


def random_isometry(rng: np.random.Generator, kind: SpaceKind,
                    scale: float = 1.0) -> Isometry:
    """A random isometry built from two random orthonormal frames."""
    p = random_point(rng, kind, scale)
    q = random_point(rng, kind, scale)
    fp = canonical_tangent_frame(p)
    fq = canonical_tangent_frame(q)
    # random tangent rotation at q
    m = rng.normal(size=(3, 3))
    qmat, _ = np.linalg.qr(m)
    fq = [sum(qmat[i, j] * fq[i] for i in range(3)) for j in range(3)]
    return isometry_from_frames(p, fp, q, fq)
