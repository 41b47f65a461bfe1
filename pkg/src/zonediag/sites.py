"""Finite site tuples, separation radii and closed-form infinite site families."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError
from .space import Box, Norm, Space


@dataclass(frozen=True, eq=False)
class SiteTuple:
    """An indexed tuple of nonempty finite point sets in a common space."""

    space: Space
    sites: tuple

    def __post_init__(self):
        m = self.space.dim
        sites = tuple(np.asarray(p, dtype=float).reshape(-1, m) for p in self.sites)
        if len(sites) < 2:
            raise ValueError("a site tuple needs at least 2 sites")
        for k, p in enumerate(sites):
            if len(p) == 0:
                raise ValueError(f"site {k} is empty")
            if not self.space.contains(p).all():
                raise DomainError(f"site {k} has points outside the world")
        object.__setattr__(self, "sites", sites)

    def __len__(self):
        return len(self.sites)

    def __getitem__(self, k):
        return self.sites[k]

    def others(self, k):
        """Union of all sites except ``k`` as one point array."""
        return np.concatenate([p for j, p in enumerate(self.sites) if j != k])

    def all_points(self):
        return np.concatenate(self.sites)

    def permuted(self, order):
        return SiteTuple(self.space, tuple(self.sites[i] for i in order))


@dataclass(frozen=True)
class SeparationRadii:
    r: np.ndarray

    @property
    def positive(self):
        """True iff every r_k > 0 (the separation hypothesis)."""
        return bool(np.all(self.r > 0))

    @property
    def violations(self):
        return [int(k) for k in np.flatnonzero(~(self.r > 0))]

    def __getitem__(self, k):
        return float(self.r[k])


def separation_radii(sites: SiteTuple) -> SeparationRadii:
    """r_k = min over j != k of d(P_k, P_j), by brute force over all pairs."""
    n = len(sites)
    pair = np.full((n, n), np.inf)
    for k in range(n):
        for j in range(k + 1, n):
            pair[k, j] = pair[j, k] = sites.space.set_distance(sites[k], sites[j])
    return SeparationRadii(pair.min(axis=1))


# ---------------------------------------------------------------------------
# Infinite families. Indices run over 1, 2, 3, ...; callers pass points as
# rows of a 2-d array and get vectorised answers back.


class Certificate(str, Enum):
    STRICTLY_DECREASING = "strictly_decreasing"
    NONE = "none"


class AnalyticSiteFamily:
    """A site family P_1, P_2, ... described by closed-form distance profiles.

    Subclasses implement ``profiles`` (d(x, P_k) for k = 1..K), ``tail_inf``
    (inf over k > K of d(x, P_k)) and, when they carry a certificate,
    ``certified`` (points where k -> d(x, P_k) strictly decreases to a limit
    that is never attained).
    """

    name = "family"
    certificate = Certificate.NONE
    finitely_compact = True
    dim = 2

    def profiles(self, X, K):
        raise NotImplementedError

    def tail_inf(self, X, K):
        raise NotImplementedError

    def certified(self, X):
        X = np.atleast_2d(X)
        return np.zeros(len(X), dtype=bool)

    def profile(self, x, k):
        """d(x, P_k) for a single point and index (k >= 1)."""
        if k < 1:
            raise DomainError("family indices start at 1")
        return float(self.profiles(np.atleast_2d(x), k)[0, k - 1])

    def tail(self, x, K):
        return float(self.tail_inf(np.atleast_2d(x), K)[0])


class ConvergingColumn(AnalyticSiteFamily):
    """P_k = {(0, 1/k)} in the Euclidean plane; sites accumulate at the origin."""

    name = "converging_column"
    certificate = Certificate.STRICTLY_DECREASING

    @staticmethod
    def height(k):
        return 1.0 / np.asarray(k, dtype=float)

    def site(self, k):
        return np.array([0.0, 1.0 / k])

    def profiles(self, X, K):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        a = self.height(np.arange(1, K + 1))
        return np.hypot(X[:, :1], X[:, 1:2] - a[None, :])

    def tail_inf(self, X, K):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        x, y = X[:, 0], X[:, 1]
        out = np.hypot(x, y)  # the limit as k -> infinity
        pos = y > 0
        if pos.any():
            # |y - 1/k| over k > K is unimodal; its minimum sits next to k = 1/y.
            with np.errstate(divide="ignore"):
                k0 = np.maximum(K + 1, np.floor(1.0 / y[pos]))
            for k in (k0, k0 + 1):
                out[pos] = np.minimum(out[pos], np.hypot(x[pos], y[pos] - 1.0 / k))
        return out

    def certified(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return X[:, 1] <= 0


class OrthonormalSpikes(AnalyticSiteFamily):
    """P_k = {((k+1)/k) e_k} in l2; points are finitely supported sequences."""

    name = "orthonormal_spikes"
    certificate = Certificate.STRICTLY_DECREASING
    finitely_compact = False
    dim = None

    @staticmethod
    def scale(k):
        k = np.asarray(k, dtype=float)
        return (k + 1.0) / k

    def _pad(self, X, width):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] >= width:
            return X
        return np.pad(X, ((0, 0), (0, width - X.shape[1])))

    def profiles(self, X, K):
        X = self._pad(X, K)
        sq = (X * X).sum(axis=1)
        xk = X[:, :K]
        s = self.scale(np.arange(1, K + 1))
        return np.sqrt(sq[:, None] - xk**2 + (xk - s[None, :]) ** 2)

    def tail_inf(self, X, K):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        sq = (X * X).sum(axis=1)
        # beyond the support of x the profile is sqrt(|x|^2 + s_k^2), which
        # decreases to sqrt(|x|^2 + 1) without reaching it
        out = np.sqrt(sq + 1.0)
        n = X.shape[1]
        if n > K:
            full = self.profiles(X, n)[:, K:]
            out = np.minimum(out, full.min(axis=1))
        return out

    def certified(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.all(X == 0, axis=1)

    def pair_distance(self, k, j):
        return float(np.hypot(self.scale(k), self.scale(j)))


class Lattice(AnalyticSiteFamily):
    """Single-point sites on pitch * Z^m, enumerated by increasing Euclidean norm."""

    name = "lattice"

    def __init__(self, dim=2, pitch=1.0, offset=None):
        self.dim = dim
        self.pitch = float(pitch)
        self.offset = np.zeros(dim) if offset is None else np.asarray(offset, dtype=float)
        self._points = np.zeros((0, dim))
        self._complete_radius = -1.0
        self._grow(16)

    def _grow(self, count):
        R = max(2, int(np.ceil(np.sqrt(count))) + 1)
        while True:
            axes = [np.arange(-R, R + 1)] * self.dim
            pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
            norms = np.sqrt((pts.astype(float) ** 2).sum(axis=1))
            keep = norms <= R
            pts, norms = pts[keep], norms[keep]
            order = np.lexsort(tuple(pts[:, i] for i in reversed(range(self.dim))) + (norms,))
            if keep.sum() >= count:
                break
            R *= 2
        self._points = self.offset + self.pitch * pts[order].astype(float)
        self._norms = self.pitch * norms[order]
        self._complete_radius = self.pitch * R

    def sites_upto(self, K):
        if len(self._points) < K:
            self._grow(2 * K)
        return self._points[:K]

    def site(self, k):
        return self.sites_upto(k)[k - 1]

    def profiles(self, X, K):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        P = self.sites_upto(K)
        return np.sqrt(((X[:, None, :] - P[None, :, :]) ** 2).sum(axis=2))

    def tail_inf(self, X, K, chunk=256):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        rel = np.sqrt(((X - self.offset) ** 2).sum(axis=1))
        best = np.full(len(X), np.inf)
        start = K
        while True:
            P = self.sites_upto(start + chunk)
            block = P[start : start + chunk]
            d = np.sqrt(((X[:, None, :] - block[None, :, :]) ** 2).sum(axis=2))
            best = np.minimum(best, d.min(axis=1))
            start += chunk
            # every later site has norm >= the next one, hence distance >= norm - |x|
            lower = self._norms[start] - rel if len(self._norms) > start else None
            if lower is None:
                self.sites_upto(start + chunk)
                lower = self._norms[start] - rel
            if np.all(lower >= best):
                return best

    def truncate(self, box: Box, margin_cells=3, norm=Norm.L2) -> "SiteTuple":
        """Finite sub-tuple of lattice sites within ``margin_cells`` pitches of ``box``."""
        lo = np.asarray(box.lo) - margin_cells * self.pitch
        hi = np.asarray(box.hi) + margin_cells * self.pitch
        axes = [
            self.offset[i] + self.pitch * np.arange(
                np.ceil((lo[i] - self.offset[i]) / self.pitch),
                np.floor((hi[i] - self.offset[i]) / self.pitch) + 1,
            )
            for i in range(self.dim)
        ]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        big = Box(tuple(lo), tuple(hi))
        return SiteTuple(Space(big, norm), tuple(p[None, :] for p in pts))


class FiniteFamily(AnalyticSiteFamily):
    """A finite tuple viewed as a family: index k refers to ``sites[k-1]``."""

    name = "finite"

    def __init__(self, sites: SiteTuple):
        self.tuple = sites
        self.dim = sites.space.dim

    def profiles(self, X, K):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n = len(self.tuple)
        cols = [self.tuple.space.point_to_set(X, self.tuple[k]) for k in range(min(K, n))]
        cols += [np.full(len(X), np.inf)] * max(0, K - n)
        return np.stack(cols, axis=1)

    def tail_inf(self, X, K):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n = len(self.tuple)
        if K >= n:
            return np.full(len(X), np.inf)
        return self.profiles(X, n)[:, K:].min(axis=1)


class FamilyName(str, Enum):
    CONVERGING_COLUMN = "converging_column"
    ORTHONORMAL_SPIKES = "orthonormal_spikes"
    LATTICE = "lattice"


def builtin_family(name) -> AnalyticSiteFamily:
    name = FamilyName(name)
    if name is FamilyName.CONVERGING_COLUMN:
        return ConvergingColumn()
    if name is FamilyName.ORTHONORMAL_SPIKES:
        return OrthonormalSpikes()
    return Lattice()
