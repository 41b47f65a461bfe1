"""Carriers (finite worlds or grids) and tuples of regions living on them.

Every region is a boolean array over the carrier: one entry per world point
for finite worlds, one per pixel for grids. The carrier knows how to turn a
region into a field of distances that can be compared exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import raster
from .errors import DomainError
from .raster import Grid
from .sites import SiteTuple, separation_radii
from .space import Box, FinitePointSet, Space


class FiniteCarrier:
    """All points of a finite world, with the full distance matrix."""

    kind = "finite"

    def __init__(self, space: Space):
        if not isinstance(space.world, FinitePointSet):
            raise TypeError("FiniteCarrier needs a finite world")
        self.space = space
        self.points = space.world.points
        self.D = space.pairwise(self.points, self.points)
        self.shape = (len(self.points),)
        self.h = 0.0

    @property
    def geodesic(self):
        return self.space.geodesic

    def empty(self):
        return np.zeros(self.shape, dtype=bool)

    def mask_of_points(self, pts):
        mask = self.empty()
        for p in np.atleast_2d(np.asarray(pts, dtype=float)).reshape(-1, self.space.dim):
            mask[self.space.world.index_of(p)] = True
        return mask

    def mask_where(self, predicate):
        return np.asarray(predicate(self.points), dtype=bool)

    def field(self, mask):
        if not mask.any():
            return np.full(self.shape, np.inf)
        return self.D[:, mask].min(axis=1)

    def to_distance(self, values):
        return np.asarray(values, dtype=float)

    def to_units(self, d):
        return np.asarray(d, dtype=float)

    def mask_distance(self, A, B):
        if not A.any() or not B.any():
            return float("inf")
        return float(self.D[np.ix_(A, B)].min())

    def perimeter(self, mask):
        return np.zeros_like(mask)

    def context(self, sites: SiteTuple):
        return SiteContext(self, sites, tuple(self.mask_of_points(p) for p in sites))

    def dom(self, masks, ctx):
        out = []
        for k, P in enumerate(ctx.site_masks):
            others = np.zeros(self.shape, dtype=bool)
            for j, R in enumerate(masks):
                if j != k:
                    others |= R
            out.append(ctx.site_fields[k] <= self.field(others))
        return tuple(out)


class GridCarrier:
    """Pixel centres of a grid over a box world; sites snap to their nearest pixel."""

    kind = "grid"

    def __init__(self, space: Space, grid: Grid):
        if not isinstance(space.world, Box):
            raise TypeError("GridCarrier needs a box world")
        if grid.m != space.dim:
            raise ValueError("grid and space dimensions differ")
        self.space = space
        self.grid = grid
        self.norm = space.norm
        self.shape = grid.shape
        self.h = grid.h

    geodesic = True

    def empty(self):
        return self.grid.empty()

    def mask_of_points(self, pts):
        return self.grid.mask_of_points(pts)

    def mask_where(self, predicate):
        return self.grid.mask_where(predicate)

    def field(self, mask):
        return raster.unit_field(mask, self.grid, self.norm)

    def to_distance(self, units):
        return raster.units_to_distance(units, self.grid, self.norm)

    def to_units(self, d):
        return raster.distance_to_units(d, self.grid, self.norm)

    def mask_distance(self, A, B):
        if not A.any() or not B.any():
            return float("inf")
        return float(self.to_distance(self.field(B)[A].min()))

    def perimeter(self, mask):
        return raster.perimeter(mask)

    def context(self, sites: SiteTuple):
        masks = tuple(self.mask_of_points(p) for p in sites)
        return GridSiteContext(self, sites, masks)

    def dom(self, masks, ctx):
        ctx.prepare_windows()
        weights = self.grid.unit_weights
        out = []
        for k in range(len(masks)):
            win = ctx.windows[k]
            others = np.zeros(ctx.window_shape(k), dtype=bool)
            for j, R in enumerate(masks):
                if j != k:
                    others |= R[win]
            f_other = raster.unit_field_weighted(others, self.norm, weights)
            new = self.empty()
            new[win] = ctx.cells[k] & (ctx.window_site_fields[k] <= f_other)
            out.append(new)
        return tuple(out)


@dataclass(eq=False)
class SiteContext:
    carrier: object
    sites: SiteTuple
    site_masks: tuple
    _fields: list = field(default=None, repr=False)

    @property
    def site_fields(self):
        if self._fields is None:
            self._fields = [self.carrier.field(P) for P in self.site_masks]
        return self._fields

    @property
    def radii(self):
        return separation_radii(self.sites)


class GridSiteContext(SiteContext):
    """Grid context; caches Voronoi cells and per-site computation windows.

    Dom(R)_k always lies in the Voronoi cell of P_k. For a pixel x of that
    cell d(x, P_k) <= rho_k (the cell radius), so only pixels of other regions
    within rho_k of the cell can decide the predicate: the transform for
    component k is computed on the cell's bounding box grown by rho_k.
    """

    windows = None

    def prepare_windows(self):
        if self.windows is not None:
            return
        grid = self.carrier.grid
        K = len(self.site_masks)
        best = np.full(grid.shape, np.inf)
        for P in self.site_masks:
            np.minimum(best, self.carrier.field(P), out=best)
        pitch = grid.pitch
        self.windows, self.cells, self.window_site_fields = [], [], []
        weights = grid.unit_weights
        for k in range(K):
            f = self.carrier.field(self.site_masks[k])
            cell = f == best
            idx = np.argwhere(cell)
            radius = float(self.carrier.to_distance(f[cell].max()))
            grow = np.ceil(radius / pitch).astype(int) + 1
            lo = np.maximum(idx.min(axis=0) - grow, 0)
            hi = np.minimum(idx.max(axis=0) + grow + 1, grid.shape)
            win = tuple(slice(int(a), int(b)) for a, b in zip(lo, hi))
            self.windows.append(win)
            self.cells.append(cell[win])
            self.window_site_fields.append(
                raster.unit_field_weighted(self.site_masks[k][win], self.carrier.norm, weights)
            )
        self.voronoi_units = best

    def window_shape(self, k):
        return tuple(s.stop - s.start for s in self.windows[k])


def make_carrier(space: Space, grid: Grid | None = None):
    if isinstance(space.world, FinitePointSet):
        return FiniteCarrier(space)
    if isinstance(space.world, Box):
        if grid is None:
            raise ValueError("box worlds need a grid")
        return GridCarrier(space, grid)
    raise TypeError("glued worlds are handled analytically, not on a carrier")


@dataclass(frozen=True, eq=False)
class RegionTuple:
    """Regions R_k (boolean arrays over the carrier) with P_k inside R_k."""

    context: SiteContext
    masks: tuple

    def __post_init__(self):
        masks = tuple(np.asarray(m, dtype=bool) for m in self.masks)
        if len(masks) != len(self.context.site_masks):
            raise ValueError("one region per site is required")
        for k, (R, P) in enumerate(zip(masks, self.context.site_masks)):
            if R.shape != self.carrier.shape:
                raise ValueError(f"region {k} has the wrong shape")
            if (P & ~R).any():
                raise DomainError(f"region {k} does not contain its site")
        object.__setattr__(self, "masks", masks)

    @property
    def carrier(self):
        return self.context.carrier

    @property
    def sites(self):
        return self.context.sites

    @property
    def site_masks(self):
        return self.context.site_masks

    def __len__(self):
        return len(self.masks)

    def __getitem__(self, k):
        return self.masks[k]

    def __iter__(self):
        return iter(self.masks)

    def replace(self, masks):
        return RegionTuple(self.context, tuple(masks))

    def equals(self, other):
        return all(np.array_equal(a, b) for a, b in zip(self.masks, other.masks))

    def subset_of(self, other):
        return all(not (a & ~b).any() for a, b in zip(self.masks, other.masks))

    def union(self):
        return np.logical_or.reduce(self.masks)

    def neutral(self):
        return ~self.union()

    def counts(self):
        return [int(m.sum()) for m in self.masks]

    @classmethod
    def of_sites(cls, context):
        return cls(context, tuple(P.copy() for P in context.site_masks))

    @classmethod
    def from_points(cls, context, members):
        """Finite worlds: each component listed as its points."""
        car = context.carrier
        return cls(context, tuple(car.mask_of_points(np.asarray(pts, dtype=float)) for pts in members))

    @classmethod
    def from_predicates(cls, context, predicates):
        car = context.carrier
        return cls(context, tuple(car.mask_where(p) for p in predicates))

    def points(self, k):
        """Coordinates of the carrier points in component ``k``."""
        car = self.carrier
        if car.kind == "finite":
            return car.points[self.masks[k]]
        return car.grid.index_to_point(np.argwhere(self.masks[k]))


def build(space: Space, sites, grid: Grid | None = None):
    """Carrier context for a site tuple (``sites`` may be a list of point sets)."""
    if not isinstance(sites, SiteTuple):
        sites = SiteTuple(space, tuple(sites))
    return make_carrier(space, grid).context(sites)
