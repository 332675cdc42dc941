"""Kinetic Fokker-Planck toolbox.

Subject: the degenerate diffusion (d_t + v d_x) f = d_v^2 f on the half-line
x > 0 with absorption at the incoming boundary, together with the geometric
and functional machinery that controls it: the scaling-weighted Galilean
group and its invariant distance, steady boundary-layer profiles, boundary
region decompositions with their weight functions, a deterministic grid
solver, a Langevin particle oracle, and numerical checks of the associated
functional inequalities.
"""

from .group import (
    KineticCylinder,
    PhasePoint,
    compose,
    dilate,
    inverse,
    kdist,
    knorm,
)
from .gridfn import Axis, GridFunction

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "GridFunction",
    "KineticCylinder",
    "PhasePoint",
    "compose",
    "dilate",
    "inverse",
    "kdist",
    "knorm",
    "__version__",
]
