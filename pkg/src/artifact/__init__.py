"""Constructions and numerical audits of angle-preserving polyhedral
deformations in hyperbolic and spherical 3-space."""

from artifact.core import SpaceKind

__all__ = ["SpaceKind"]
__version__ = "0.1.0"
