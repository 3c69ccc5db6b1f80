"""detourkit: planar detour-set constructions, Whitney decompositions,
quasihyperbolic geodesics and numerical removability certificates."""

from . import certify, detour, domains, fractals, geometry, qhyp, whitney
from .geometry import TOL, Interval1D, Line, Point, SceneComponent

__version__ = "0.1.0"

__all__ = [
    "TOL",
    "Point",
    "Line",
    "Interval1D",
    "SceneComponent",
    "geometry",
    "domains",
    "fractals",
    "whitney",
    "qhyp",
    "detour",
    "certify",
]
