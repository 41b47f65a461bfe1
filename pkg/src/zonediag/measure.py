"""Radial representation of dominance regions, spherical volumes and concentration checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import raster
from .errors import DomainError, PreconditionError
from .raster import Grid
from .regions import RegionTuple
from .sites import SiteTuple, separation_radii
from .space import Box, Space

BISECT_TOL = 1e-10


def unit_directions(m, n, rng):
    """``n`` uniform directions on the Euclidean unit sphere of R^m."""
    v = rng.standard_normal((n, m))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sphere_surface(m):
    """Surface measure of the unit sphere S^{m-1}."""
    return 2.0 * math.pi ** (m / 2) / math.gamma(m / 2)


def exit_time(box: Box, p, theta):
    """Largest t with p + t*theta still in the box, per direction."""
    p = np.asarray(p, dtype=float)
    theta = np.atleast_2d(theta)
    lo, hi = np.asarray(box.lo), np.asarray(box.hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_hi = np.where(theta > 0, (hi - p) / theta, np.inf)
        t_lo = np.where(theta < 0, (lo - p) / theta, np.inf)
    return np.minimum(t_hi, t_lo).min(axis=1)


def ray_T(space: Space, p, theta, A, t_max=None, tol=BISECT_TOL):
    """T(theta) = sup{t <= t_max : ||t theta|| <= d(p + t theta, A)}.

    ``theta`` is one Euclidean unit vector or an (n, m) array of them; the
    returned t is a Euclidean length so the spherical volume formula applies
    under every norm. t*||theta|| - d(p + t theta, A) is nondecreasing in t
    (distance to A is ||theta||-Lipschitz along the ray), so the feasible t
    form an interval starting at 0 and bisection finds its end.
    """
    if not isinstance(space.world, Box):
        raise DomainError("ray shooting needs a box world")
    p = np.asarray(p, dtype=float).reshape(-1)
    A = np.asarray(A, dtype=float).reshape(-1, space.dim)
    if len(A) == 0:
        raise DomainError("the opposing set A is empty")
    if not space.contains(p[None])[0]:
        raise DomainError("p lies outside the world")
    if space.point_to_set(p[None], A)[0] <= 0:
        raise DomainError("p lies in the closure of A")
    single = np.ndim(theta) == 1
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    scale = space.norm.of(theta, axis=1)
    cap = exit_time(space.world, p, theta)
    if t_max is not None:
        cap = np.minimum(cap, t_max)

    def feasible(t):
        x = p + t[:, None] * theta
        return t * scale <= space.point_to_set(x, A)

    lo = np.zeros(len(theta))
    hi = cap.copy()
    done = feasible(hi)
    out = np.where(done, hi, 0.0)
    todo = ~done
    lo, hi = lo[todo], hi[todo]
    th, sc = theta[todo], scale[todo]
    while len(lo) and (hi - lo).max() > tol:
        mid = 0.5 * (lo + hi)
        ok = mid * sc <= space.point_to_set(p + mid[:, None] * th, A)
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    out[todo] = lo
    return float(out[0]) if single else out


@dataclass
class RadialProfile:
    center: np.ndarray
    directions: np.ndarray
    values: np.ndarray
    t_max: np.ndarray

    @property
    def m(self):
        return self.directions.shape[1]


def radial_profile(space: Space, p, A, n, rng, t_max=None) -> RadialProfile:
    theta = unit_directions(space.dim, n, rng)
    values = ray_T(space, p, theta, A, t_max)
    cap = exit_time(space.world, p, theta)
    if t_max is not None:
        cap = np.minimum(cap, t_max)
    return RadialProfile(np.asarray(p, dtype=float), theta, values, cap)


def radial_volume(profile: RadialProfile, min_samples=1000):
    """(volume, standard error) of {p + t theta : t <= T(theta)} by Monte Carlo."""
    n = len(profile.values)
    if n < min_samples:
        raise ValueError(f"need at least {min_samples} directions, got {n}")
    m = profile.m
    w = np.asarray(profile.values, dtype=float) ** m
    c = sphere_surface(m) / m
    return float(c * w.mean()), float(c * w.std(ddof=1) / math.sqrt(n))


def constant_profile(value, m, n, rng):
    theta = unit_directions(m, n, rng)
    vals = np.full(n, float(value))
    return RadialProfile(np.zeros(m), theta, vals, vals.copy())


def raster_cell_volume(grid: Grid, fields, k):
    """Pixel volume of the Voronoi cell k; tied pixels are shared evenly."""
    best = np.minimum.reduce(fields)
    ties = sum((f == best).astype(np.int64) for f in fields)
    own = fields[k] == best
    return float((own / np.maximum(ties, 1)).sum() * grid.cell_volume)


# ---------------------------------------------------------------------------
# concentration


def growth_factor(r, rho, omega):
    """c = 1 + min(r/(32 rho), omega/rho)."""
    return 1.0 + min(r / (32.0 * rho), omega / rho)


def shell_width(r, omega):
    """sigma = min(r/32, omega)."""
    return min(r / 32.0, omega)


def decay_table(c, dims=range(2, 7)):
    return [(m, c ** (-m)) for m in dims]


@dataclass
class RegionVolume:
    index: int
    interior: bool
    boundary_distance: float
    rho: float
    c: float
    sigma: float
    vol_R: float
    vol_N: float
    lower_bound: float
    slack: float
    shell_outside_N: int

    @property
    def passed(self):
        return self.vol_N >= self.lower_bound - self.slack


@dataclass
class VolumeReport:
    m: int
    omega: float
    r: float
    rho: float
    c: float
    regions: list
    vol_F: float
    vol_N: float
    ratio: float
    ratio_bound: float
    ratio_slack: float
    h: float
    decay: list = field(default_factory=list)
    note: str = ""

    @property
    def interior(self):
        return [g for g in self.regions if g.interior]

    @property
    def has_interior(self):
        return bool(self.interior)

    @property
    def regions_pass(self):
        return all(g.passed for g in self.interior)

    @property
    def ratio_pass(self):
        return self.has_interior and self.ratio <= self.ratio_bound + self.ratio_slack

    @property
    def passed(self):
        return self.has_interior and self.regions_pass and self.ratio_pass

    def csv_lines(self):
        lines = [
            "index,interior,boundary_distance,rho,c,sigma,vol_R,vol_N,lower_bound,slack,pass"
        ]
        for g in self.regions:
            lines.append(
                f"{g.index},{int(g.interior)},{g.boundary_distance:.9g},{g.rho:.9g},{g.c:.9g},"
                f"{g.sigma:.9g},{g.vol_R:.9g},{g.vol_N:.9g},{g.lower_bound:.9g},{g.slack:.9g},"
                f"{int(g.passed) if g.interior else ''}"
            )
        return lines

    def text(self):
        out = [
            f"m={self.m} r={self.r:.6g} rho={self.rho:.6g} omega={self.omega:.6g} "
            f"c={self.c:.9g} h={self.h:.6g}",
            f"interior regions: {len(self.interior)} of {len(self.regions)}",
        ]
        if not self.has_interior:
            out.append("no interior region; the concentration hypotheses are not met")
            return "\n".join(out)
        out.append(
            f"vol(F)={self.vol_F:.6g} vol(N)={self.vol_N:.6g} "
            f"ratio={self.ratio:.6g} bound c^-m={self.ratio_bound:.6g} slack={self.ratio_slack:.3g}"
        )
        out.append("c^-m decay: " + " ".join(f"m={m}:{v:.6g}" for m, v in self.decay))
        if self.note:
            out.append(self.note)
        return "\n".join(out)


def ball_radius(grid: Grid, norm, others_mask):
    """Grid sup of d(x, A) plus h: the smallest certified rho for the ball condition."""
    f = raster.distance_field(others_mask, grid, norm)
    return float(f.max()) + grid.h


def concentration_report_raster(R: RegionTuple, omega: float, rho=None, check_fixed_point=True) -> VolumeReport:
    """Check vol(N_j) >= (c^m - 1) vol(R_j) and vol(F)/(vol(F)+vol(N)) <= c^-m on a raster.

    ``R`` should be a converged double zone diagram of point sites on a grid
    (m >= 2). N_j is the part of the neutral region within sigma of R_j, which
    is exactly the set the volume bound is derived from. ``rho`` defaults to
    the grid-certified ball radius for the other sites of each region; a given
    value is checked against the grid and rejected when too small.
    """
    car = R.carrier
    if car.kind != "grid":
        raise PreconditionError("volume checks need a raster carrier", "box world")
    grid, norm = car.grid, car.norm
    m = grid.m
    if m < 2:
        raise PreconditionError("the spherical volume formula needs m >= 2", "dimension m >= 2")
    radii = separation_radii(R.sites)
    if not radii.positive:
        raise PreconditionError("sites are not separated", "positive site separation")
    if check_fixed_point:
        again = R.replace(car.dom(car.dom(R.masks, R.context), R.context))
        if not again.equals(R):
            raise PreconditionError("the tuple is not a double zone diagram", "double zone diagram")
    r = float(radii.r.min())
    pts = grid.points().reshape(grid.shape + (m,))
    bdist = grid.box.boundary_distance(pts)
    N = R.neutral()
    vol_px = grid.cell_volume
    regions = []
    rhos = []
    for j, Rj in enumerate(R.masks):
        others = np.zeros(grid.shape, dtype=bool)
        for i, P in enumerate(R.site_masks):
            if i != j:
                others |= P
        rho_grid = ball_radius(grid, norm, others)
        if rho is None:
            rho_j = rho_grid
        else:
            if rho_grid - grid.h >= rho:
                raise PreconditionError(
                    f"a ball of radius {rho} misses every other site (grid sup {rho_grid - grid.h:.6g})",
                    "ball condition for rho",
                )
            rho_j = float(rho)
        rhos.append(rho_j)
        bd = float(bdist[Rj].min()) if Rj.any() else 0.0
        interior = bd >= omega
        c = growth_factor(float(radii.r[j]), rho_j, omega)
        sigma = shell_width(float(radii.r[j]), omega)
        near = raster.dilate(Rj, grid, sigma, norm) & ~Rj
        Nj = near & N
        vol_R = float(Rj.sum()) * vol_px
        vol_N = float(Nj.sum()) * vol_px
        slack = float(raster.perimeter(Rj).sum()) * vol_px
        regions.append(
            RegionVolume(
                j, interior, bd, rho_j, c, sigma, vol_R, vol_N,
                (c ** m - 1.0) * vol_R, slack, int((near & ~N).sum()),
            )
        )
    rho_all = max(rhos)
    c_all = growth_factor(r, rho_all, omega)
    J = [g.index for g in regions if g.interior]
    F = np.zeros(grid.shape, dtype=bool)
    for j in J:
        F |= R.masks[j]
    vol_F = float(F.sum()) * vol_px
    vol_N = float(N.sum()) * vol_px
    total = vol_F + vol_N
    ratio = vol_F / total if total > 0 else float("nan")
    slack = float(raster.perimeter(F).sum()) * vol_px / total if total > 0 else 0.0
    return VolumeReport(
        m, omega, r, rho_all, c_all, regions, vol_F, vol_N, ratio, c_all ** (-m), slack,
        grid.h, decay_table(c_all),
    )


# ---------------------------------------------------------------------------
# density


@dataclass
class DensityReport:
    center_margin: float
    center_ok: bool
    max_gap: float
    ball_ok: bool
    site: int | None = None
    cell_margin: float | None = None
    margin_ok: bool | None = None
    h: float = 0.0

    @property
    def passed(self):
        return self.center_ok and self.ball_ok and bool(self.margin_ok)


def density_check(world: Box, sites: SiteTuple, omega: float, grid: Grid) -> DensityReport:
    """Sufficient condition for an interior Voronoi cell.

    Needs a point with boundary distance >= (8/3) omega and every point
    within (2/3) omega of some site (checked on ``grid`` with slack h). When
    both hold, the cell of a site near the deepest point is measured on the
    grid and must keep distance omega (minus h) from the boundary.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    lo, hi = np.asarray(world.lo), np.asarray(world.hi)
    center = (lo + hi) / 2
    center_margin = float((hi - lo).min() / 2)
    center_ok = center_margin >= (8.0 / 3.0) * omega
    norm = sites.space.norm
    all_sites = grid.mask_of_points(sites.all_points())
    f_all = raster.unit_field(all_sites, grid, norm)
    max_gap = float(raster.units_to_distance(f_all.max(), grid, norm)) + grid.h
    ball_ok = max_gap < (2.0 / 3.0) * omega
    rep = DensityReport(center_margin, center_ok, max_gap, ball_ok, h=grid.h)
    if not (center_ok and ball_ok):
        return rep
    d = np.array([sites.space.point_to_set(center[None], P)[0] for P in sites.sites])
    k = int(d.argmin())
    f_k = raster.unit_field(grid.mask_of_points(sites[k]), grid, norm)
    cell = f_k == f_all
    pts = grid.points().reshape(grid.shape + (grid.m,))
    margin = float(world.boundary_distance(pts[cell]).min())
    rep.site, rep.cell_margin, rep.margin_ok = k, margin, margin >= omega - grid.h
    return rep
