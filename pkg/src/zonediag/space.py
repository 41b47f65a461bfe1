"""Worlds, distance functions and geodesic segment oracles.

Points are plain numpy vectors. Three kinds of world are supported:

* :class:`Box` -- an axis-aligned box in R^m under an l1, l2 or l-infinity norm
  (convex, hence geodesic);
* :class:`FinitePointSet` -- a finite subset of R^m with the ambient norm
  (not geodesic unless it has a single point);
* :class:`GluedSegmentDisk` -- the segment {0} x (-2, 3] glued to the closed
  unit disk centred at (0, -3) through the junction (0, -2).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .errors import DomainError, UnsupportedOperation

TOL = 1e-9


class Norm(str, Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    def of(self, v, axis=-1):
        v = np.asarray(v, dtype=float)
        if self is Norm.L1:
            return np.abs(v).sum(axis=axis)
        if self is Norm.L2:
            return np.sqrt((v * v).sum(axis=axis))
        return np.abs(v).max(axis=axis)


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi) or not lo:
            raise ValueError("box bounds must be nonempty vectors of equal length")
        if any(h <= l for l, h in zip(lo, hi)):
            raise ValueError(f"degenerate box {lo} .. {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    def boundary_distance(self, x):
        """Distance from interior points to the box boundary.

        The nearest boundary point differs from ``x`` in one coordinate, so the
        value is the same under all three norms.
        """
        x = np.asarray(x, dtype=float)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.minimum(x - lo, hi - x).min(axis=-1)


@dataclass(frozen=True, eq=False)
class FinitePointSet:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or len(pts) == 0:
            raise ValueError("a finite world needs at least one point")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return len(self.points)

    def index_of(self, x, tol=TOL):
        """Index of the world point equal to ``x``; DomainError if absent."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        hits = np.flatnonzero(np.abs(self.points - x).max(axis=1) <= tol)
        if len(hits) == 0:
            raise DomainError(f"point {x.tolist()} is not in the finite world")
        return int(hits[0])


@dataclass(frozen=True)
class GluedSegmentDisk:
    """A segment glued to a disk; distances between components pass the junction."""

    segment_lo: float = -2.0
    segment_hi: float = 3.0
    disk_center: tuple = (0.0, -3.0)
    disk_radius: float = 1.0
    junction: tuple = (0.0, -2.0)

    dim = 2

    def component(self, x):
        """1 for the segment, 2 for the disk (junction included); 0 if outside."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        c = np.asarray(self.disk_center)
        in_disk = np.sqrt(((x - c) ** 2).sum(axis=1)) <= self.disk_radius + TOL
        on_seg = (
            (np.abs(x[:, 0]) <= TOL)
            & (x[:, 1] > self.segment_lo)
            & (x[:, 1] <= self.segment_hi + TOL)
        )
        return np.where(in_disk, 2, np.where(on_seg, 1, 0))


World = Union[Box, FinitePointSet, GluedSegmentDisk]


def _euclid(a, b):
    return np.sqrt(((a - b) ** 2).sum(axis=-1))


@dataclass(frozen=True, eq=False)
class Space:
    """A world together with its distance function.

    ``norm`` is ignored for the glued world, which carries its own metric.
    """

    world: World
    norm: Norm = Norm.L2

    def __post_init__(self):
        object.__setattr__(self, "norm", Norm(self.norm))

    @property
    def dim(self):
        return self.world.dim

    @property
    def geodesic(self):
        if isinstance(self.world, FinitePointSet):
            return len(self.world) <= 1
        return True

    # -- membership -------------------------------------------------------
    def contains(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.dim:
            return np.zeros(len(x), dtype=bool)
        w = self.world
        if isinstance(w, Box):
            return np.all((x >= np.asarray(w.lo) - TOL) & (x <= np.asarray(w.hi) + TOL), axis=1)
        if isinstance(w, FinitePointSet):
            diff = np.abs(x[:, None, :] - w.points[None, :, :]).max(axis=2)
            return (diff <= TOL).any(axis=1)
        return w.component(x) > 0

    def check(self, *points):
        for p in points:
            if not bool(np.all(self.contains(p))):
                raise DomainError(f"point {np.asarray(p).tolist()} lies outside the world")

    # -- distances --------------------------------------------------------
    def pairwise(self, X, Y):
        """Distance matrix between the rows of ``X`` and the rows of ``Y``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if isinstance(self.world, GluedSegmentDisk):
            return self._glued_pairwise(X, Y)
        return self.norm.of(X[:, None, :] - Y[None, :, :])

    def _glued_pairwise(self, X, Y):
        w = self.world
        cx, cy = w.component(X), w.component(Y)
        if (cx == 0).any() or (cy == 0).any():
            raise DomainError("point outside the glued world")
        j = np.asarray(w.junction)
        direct = _euclid(X[:, None, :], Y[None, :, :])
        via = _euclid(X, j)[:, None] + _euclid(Y, j)[None, :]
        return np.where(cx[:, None] == cy[None, :], direct, via)

    def distance(self, x, y):
        self.check(x, y)
        return float(self.pairwise(np.atleast_2d(x), np.atleast_2d(y))[0, 0])

    def point_along(self, x, y, t):
        """The point at distance ``t`` from ``x`` on a metric segment to ``y``."""
        if not self.geodesic:
            raise UnsupportedOperation("metric segments need a geodesic space")
        self.check(x, y)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        d = self.distance(x, y)
        if t < -TOL or t > d + TOL:
            raise DomainError(f"t={t} outside [0, {d}]")
        t = min(max(t, 0.0), d)
        if d == 0.0:
            return x.copy()
        if isinstance(self.world, GluedSegmentDisk):
            w = self.world
            if w.component(x)[0] != w.component(y)[0]:
                j = np.asarray(w.junction)
                a = float(_euclid(x, j))
                if t <= a:
                    return x + (j - x) * (t / a) if a > 0 else j.copy()
                b = d - a
                return j + (y - j) * ((t - a) / b)
        # straight segment: norm-homogeneity gives d(x, x + s(y-x)) = s d(x, y)
        return x + (y - x) * (t / d)

    def set_distance(self, A, B):
        """inf over pairs; +inf when either set is empty."""
        if isinstance(A, GluedSet) and isinstance(B, GluedSet):
            return A.set_distance(B)
        A = np.asarray(A, dtype=float)
        B = np.asarray(B, dtype=float)
        if A.size == 0 or B.size == 0:
            return float("inf")
        A = A.reshape(-1, self.dim)
        B = B.reshape(-1, self.dim)
        return float(self.pairwise(A, B).min())

    def point_to_set(self, X, A):
        """d(x, A) for each row of ``X``; +inf for empty ``A``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if isinstance(A, GluedSet):
            return A.distance(X)
        A = np.asarray(A, dtype=float)
        if A.size == 0:
            return np.full(len(X), np.inf)
        return self.pairwise(X, A.reshape(-1, self.dim)).min(axis=1)


def distance(space: Space, x, y) -> float:
    return space.distance(x, y)


def point_along(space: Space, x, y, t: float):
    return space.point_along(x, y, t)


def set_distance(space: Space, A, B) -> float:
    return space.set_distance(A, B)


def glued_space() -> Space:
    return Space(GluedSegmentDisk())


@dataclass(frozen=True)
class GluedSet:
    """A subset of the glued world: an interval of the segment, optionally plus the disk.

    The segment part is ``{0} x [seg_lo, seg_hi]`` with each end open or
    closed; ``seg_lo=None`` means no segment part.
    """

    seg_lo: float | None = None
    seg_hi: float | None = None
    lo_closed: bool = True
    hi_closed: bool = True
    disk: bool = False

    _world = GluedSegmentDisk()

    def _heights(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        comp = self._world.component(X)
        if (comp == 0).any():
            raise DomainError("point outside the glued world")
        return X, comp, X[:, 1]

    def contains(self, X):
        X, comp, s = self._heights(X)
        inside = np.zeros(len(X), dtype=bool)
        if self.disk:
            inside |= comp == 2
        if self.seg_lo is not None:
            lo_ok = s >= self.seg_lo if self.lo_closed else s > self.seg_lo
            hi_ok = s <= self.seg_hi if self.hi_closed else s < self.seg_hi
            inside |= (comp == 1) & lo_ok & hi_ok
        return inside

    def distance(self, X):
        X, comp, s = self._heights(X)
        j = np.asarray(self._world.junction)
        to_j = _euclid(X, j)
        out = np.full(len(X), np.inf)
        if self.seg_lo is not None:
            on_seg = np.abs(np.clip(s, self.seg_lo, self.seg_hi) - s)
            from_disk = to_j + (self.seg_lo - self._world.segment_lo)
            out = np.minimum(out, np.where(comp == 1, on_seg, from_disk))
        if self.disk:
            out = np.minimum(out, np.where(comp == 2, 0.0, to_j))
        return out

    def set_distance(self, other: "GluedSet") -> float:
        best = np.inf
        base = self._world.segment_lo
        if self.disk and other.disk:
            return 0.0
        if self.seg_lo is not None and other.seg_lo is not None:
            gap = max(self.seg_lo - other.seg_hi, other.seg_lo - self.seg_hi, 0.0)
            best = min(best, gap)
        if self.seg_lo is not None and other.disk:
            best = min(best, self.seg_lo - base)
        if self.disk and other.seg_lo is not None:
            best = min(best, other.seg_lo - base)
        return float(best)
