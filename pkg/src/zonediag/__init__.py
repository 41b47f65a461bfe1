"""Voronoi, zone and territory diagrams on finite worlds and rasterised boxes."""
from .errors import DomainError, PreconditionError, UnsupportedOperation
from .space import Box, FinitePointSet, Norm, Space, distance, glued_space, point_along, set_distance
from .sites import SiteTuple, builtin_family, separation_radii
from .regions import RegionTuple, build
from .raster import Grid

__all__ = [
    "Box",
    "DomainError",
    "FinitePointSet",
    "Grid",
    "Norm",
    "PreconditionError",
    "RegionTuple",
    "SiteTuple",
    "Space",
    "UnsupportedOperation",
    "build",
    "builtin_family",
    "distance",
    "glued_space",
    "point_along",
    "separation_radii",
    "set_distance",
]

__version__ = "0.1.0"
