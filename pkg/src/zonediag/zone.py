"""The Dom operator, zone-diagram iteration, classification and neutral-zone checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import PreconditionError
from .regions import RegionTuple, SiteContext
from .sites import separation_radii
from .space import GluedSet, Space, glued_space

SEPARATION = "positive site separation (r_k > 0 for every k)"
GEODESIC = "geodesic space"


def dom_step(R: RegionTuple) -> RegionTuple:
    """Dom(R)_k = {x : d(x, P_k) <= d(x, union of R_j, j != k)}, all k at once."""
    return R.replace(R.carrier.dom(R.masks, R.context))


def dom_power(R: RegionTuple, n: int) -> RegionTuple:
    for _ in range(n):
        R = dom_step(R)
    return R


# ---------------------------------------------------------------------------
# iteration


@dataclass
class IterationTrace:
    evens: list
    odds: list
    rows: list
    converged: bool
    steps: int
    sandwich_ok: bool
    sandwich_failures: list = field(default_factory=list)

    @property
    def even_limit(self) -> RegionTuple:
        """Last even iterate: the least double zone diagram once converged."""
        return self.evens[-1]

    @property
    def odd_limit(self) -> RegionTuple:
        """Last odd iterate: the greatest double zone diagram once converged."""
        return self.odds[-1]

    @property
    def unique_zone(self):
        """Even and odd limits coincide, so the common limit is a zone diagram."""
        return self.converged and self.even_limit.equals(self.odd_limit)

    def csv_lines(self):
        K = len(self.evens[0])
        head = "step,parity," + ",".join(f"count_{k}" for k in range(K)) + ",neutral"
        lines = [head]
        for step, counts, neutral in self.rows:
            parity = "even" if step % 2 == 0 else "odd"
            lines.append(f"{step},{parity}," + ",".join(map(str, counts)) + f",{neutral}")
        return lines


def iterate(context: SiteContext, max_iter: int = 200, keep_all: bool = True) -> IterationTrace:
    """Apply Dom repeatedly starting from R^0 = P.

    Even iterates grow and odd ones shrink; on a finite carrier both sequences
    stabilise exactly. Stops once two consecutive iterates of the same parity
    agree, or after ``max_iter`` applications (then ``converged`` is False).
    The inclusions even_n <= even_{n+1} <= odd_{m+1} <= odd_m are checked
    pixel-exactly as the iteration proceeds.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    R = RegionTuple.of_sites(context)
    evens, odds = [R], []
    rows = [(0, R.counts(), int(R.neutral().sum()))]
    failures = []
    converged = False
    step = 0
    prev = {0: R, 1: None}
    while step < max_iter:
        step += 1
        R = dom_step(R)
        rows.append((step, R.counts(), int(R.neutral().sum())))
        parity = step % 2
        last = prev[parity]
        if parity == 0:
            if not last.subset_of(R):
                failures.append(f"even iterate {step - 2} not inside {step}")
        else:
            if last is not None and not R.subset_of(last):
                failures.append(f"odd iterate {step} not inside {step - 2}")
            if not prev[0].subset_of(R):
                failures.append(f"even iterate {step - 1} not inside odd {step}")
        (evens if parity == 0 else odds).append(R)
        if not keep_all:
            del (evens if parity == 0 else odds)[:-2]
        prev[parity] = R
        if last is not None and last.equals(R):
            converged = True
            # drop the repeated iterate so the limits are the last distinct ones
            (evens if parity == 0 else odds).pop()
            rows.pop()
            step -= 1
            break
    if not odds:
        odds.append(dom_step(evens[-1]))
    if not evens[-1].subset_of(odds[-1]):
        failures.append("even limit not inside odd limit")
    return IterationTrace(evens, odds, rows, converged, step, not failures, failures)


def two_site_zone(trace: IterationTrace, first: int = 0) -> RegionTuple:
    """A zone diagram of two sites assembled from the limits of the iteration.

    With E = Dom(O) and O = Dom(E), the pair (E_1, O_2) satisfies
    R_1 = dom(P_1, R_2) and R_2 = dom(P_2, R_1), so it is a zone diagram even
    when E and O differ. ``first`` picks which component comes from E.
    """
    E, O = trace.even_limit, trace.odd_limit
    if len(E) != 2:
        raise ValueError("the mixed construction needs exactly two sites")
    if not trace.converged:
        raise PreconditionError("the iteration did not converge", "converged iteration")
    masks = (E[0], O[1]) if first == 0 else (O[0], E[1])
    return E.replace(masks)


# ---------------------------------------------------------------------------
# classification


class Status(str, Enum):
    TRUE = "true"
    UP_TO_DISCRETIZATION = "up-to-discretization"
    FALSE = "false"

    @property
    def holds(self):
        return self is not Status.FALSE


@dataclass(frozen=True)
class Relation:
    status: Status
    violations: int
    budget: int


@dataclass(frozen=True)
class DiagramClass:
    territory: Relation
    double_territory: Relation
    zone: Relation
    double_zone: Relation
    h: float

    @property
    def is_territory(self):
        return self.territory.status.holds

    @property
    def is_double_territory(self):
        return self.double_territory.status.holds

    @property
    def is_zone(self):
        return self.zone.status.holds

    @property
    def is_double_zone(self):
        return self.double_zone.status.holds

    @property
    def consistent(self):
        """zone => territory and double zone; double zone => double territory."""
        ok = True
        if self.is_zone:
            ok &= self.is_territory and self.is_double_zone
        if self.is_double_zone:
            ok &= self.is_double_territory
        return ok


def _relation(R, image, equality, budget, grid):
    if equality:
        v = sum(int((a ^ b).sum()) for a, b in zip(R.masks, image.masks))
    else:
        v = sum(int((a & ~b).sum()) for a, b in zip(R.masks, image.masks))
    if v == 0:
        status = Status.TRUE
    elif grid and v <= budget:
        status = Status.UP_TO_DISCRETIZATION
    else:
        status = Status.FALSE
    return Relation(status, v, budget)


def classify(R: RegionTuple) -> DiagramClass:
    """Territory (R <= Dom R), double territory (R <= Dom^2 R), zone, double zone.

    Finite worlds are decided exactly. On grids a relation failing on at most
    as many pixels as the regions have boundary pixels is reported as true up
    to discretisation.
    """
    D1 = dom_step(R)
    D2 = dom_step(D1)
    grid = R.carrier.kind == "grid"
    budget = sum(int(R.carrier.perimeter(m).sum()) for m in R.masks) if grid else 0
    return DiagramClass(
        territory=_relation(R, D1, False, budget, grid),
        double_territory=_relation(R, D2, False, budget, grid),
        zone=_relation(R, D1, True, budget, grid),
        double_zone=_relation(R, D2, True, budget, grid),
        h=R.carrier.h,
    )


# ---------------------------------------------------------------------------
# neutral zone, separation, equilibrium


class Kind(str, Enum):
    TERRITORY = "territory"
    DOUBLE_TERRITORY = "double_territory"


def _require(R: RegionTuple, kind: Kind, cls: DiagramClass | None = None, need_geodesic=True):
    radii = separation_radii(R.sites)
    if not radii.positive:
        raise PreconditionError(
            f"sites {radii.violations} touch another site; without separation a tuple "
            "can fill the whole space (every real number its own site)",
            SEPARATION,
        )
    if need_geodesic and not R.carrier.geodesic:
        raise PreconditionError(
            "the space is not geodesic; on {-1, 0, 1} a zone diagram covers everything",
            GEODESIC,
        )
    cls = cls or classify(R)
    holds = cls.is_territory if kind is Kind.TERRITORY else cls.is_double_territory
    if not holds:
        raise PreconditionError(f"the tuple is not a {kind.value.replace('_', ' ')} diagram", kind.value)
    return radii.r, cls


def shell_radii(r, kind: Kind):
    r = np.asarray(r, dtype=float)
    if Kind(kind) is Kind.TERRITORY:
        return r / 3.0
    out = np.empty_like(r)
    for k in range(len(r)):
        out[k] = (r[k] + np.delete(r, k).min()) / 8.0
    return out


@dataclass
class NeutralZone:
    neutral: np.ndarray
    betas: np.ndarray
    shells: list
    shell_violations: list
    budget: int
    kind: Kind

    @property
    def nonempty(self):
        return bool(self.neutral.any())

    @property
    def shells_inside(self):
        return all(v == 0 for v in self.shell_violations)

    @property
    def shells_inside_up_to_discretization(self):
        return sum(self.shell_violations) <= self.budget


def neutral_zone(R: RegionTuple, kind=Kind.TERRITORY, cls: DiagramClass | None = None) -> NeutralZone:
    """N = X minus the union of the R_k, and shells S_k = {x not in R_k : d(x, R_k) < beta_k}.

    beta_k is r_k/3 for territory diagrams and (r_k + min_{j != k} r_j)/8 for
    double territory diagrams; in a geodesic space every shell lies in N.
    """
    kind = Kind(kind)
    r, _ = _require(R, kind, cls)
    betas = shell_radii(r, kind)
    car = R.carrier
    N = R.neutral()
    shells, viol = [], []
    for k, Rk in enumerate(R.masks):
        S = ~Rk & (car.field(Rk) < car.to_units(betas[k]))
        shells.append(S)
        viol.append(int((S & ~N).sum()))
    budget = sum(int(car.perimeter(m).sum()) for m in R.masks) if car.kind == "grid" else 0
    return NeutralZone(N, betas, shells, viol, budget, kind)


def separation_bound(r, k, j, kind):
    if Kind(kind) is Kind.TERRITORY:
        return float(max(r[k], r[j]) / 3.0)
    return float(r[k] / 8.0 + r[j] / 8.0)


@dataclass(frozen=True)
class PairSeparation:
    k: int
    j: int
    distance: float
    bound: float
    slack: float

    @property
    def passed(self):
        return self.distance >= self.bound - self.slack


def pair_distances(R: RegionTuple):
    """Matrix of grid-restricted (or exact, on finite worlds) d(R_k, R_j)."""
    car = R.carrier
    K = len(R)
    out = np.full((K, K), np.inf)
    for k in range(K):
        if not R[k].any():
            continue
        f = car.field(R[k])
        for j in range(K):
            if j != k and R[j].any():
                out[k, j] = float(car.to_distance(f[R[j]].min()))
    return np.minimum(out, out.T)


def separation_check(R: RegionTuple, kind=Kind.TERRITORY, cls: DiagramClass | None = None, check_class=True):
    """d(R_k, R_j) against the lower bound for the given diagram kind; slack 2h."""
    kind = Kind(kind)
    if check_class:
        r, _ = _require(R, kind, cls, need_geodesic=kind is Kind.DOUBLE_TERRITORY)
    else:
        r = separation_radii(R.sites).r
    D = pair_distances(R)
    slack = 2.0 * R.carrier.h
    out = []
    for k in range(len(R)):
        for j in range(k + 1, len(R)):
            out.append(PairSeparation(k, j, float(D[k, j]), separation_bound(r, k, j, kind), slack))
    return out


@dataclass(frozen=True)
class ChallengeResult:
    violated: bool
    witness: np.ndarray | None = None
    site_distance: float | None = None
    other_distance: float | None = None


def challenge_enlargement(R: RegionTuple, k: int, A) -> ChallengeResult:
    """Try to enlarge R_k by A (taken away from the other regions).

    Returns a witness x in A that P_k no longer dominates, i.e.
    d(x, P_k) > d(x, union of the shrunken R_j, j != k), or a result with
    ``violated=False`` when every point of A stays defended.
    """
    car = R.carrier
    A = np.asarray(A)
    if A.dtype != bool:
        A = car.mask_of_points(A)
    if not A.any():
        raise PreconditionError("the enlargement set is empty", "nonempty enlargement")
    others_sites = np.zeros(car.shape, dtype=bool)
    for j, P in enumerate(R.site_masks):
        if j != k:
            others_sites |= P
    if (A & R[k]).any() or (A & others_sites).any():
        raise PreconditionError(
            "the enlargement must avoid R_k and the other sites", "admissible enlargement"
        )
    others = np.zeros(car.shape, dtype=bool)
    for j, Rj in enumerate(R.masks):
        if j != k:
            others |= Rj & ~A
    f_site = R.context.site_fields[k]
    f_other = car.field(others)
    bad = A & (f_site > f_other)
    if not bad.any():
        return ChallengeResult(False)
    i = tuple(np.argwhere(bad)[0])
    if car.kind == "finite":
        x = car.points[i[0]]
    else:
        x = car.grid.index_to_point(np.array(i))
    return ChallengeResult(
        True, x, float(car.to_distance(f_site[i])), float(car.to_distance(f_other[i]))
    )


# ---------------------------------------------------------------------------
# structural checks used by the property suites and reports


def voronoi_containment(R: RegionTuple):
    """Pixels of R_k outside the Voronoi cell of P_k, per k (zero for territories)."""
    fields = R.context.site_fields
    best = np.minimum.reduce(fields)
    return [int((Rk & (f != best)).sum()) for Rk, f in zip(R.masks, fields)]


def site_neighbourhood_violations(R: RegionTuple, slack=None):
    """Points with d(x, P_k) < r_k/4 - slack that are missing from R_k, per k."""
    car = R.carrier
    slack = car.h if slack is None else slack
    r = separation_radii(R.sites).r
    out = []
    for k, (Rk, f) in enumerate(zip(R.masks, R.context.site_fields)):
        lim = r[k] / 4.0 - slack
        if lim <= 0:
            out.append(0)
            continue
        ball = f < car.to_units(lim)
        out.append(int((ball & ~Rk).sum()))
    return out


# ---------------------------------------------------------------------------
# the glued segment-and-disk world, handled with closed-form sets


def glued_tuple():
    """Sites (0, 3), (0, -3); R_1 = {0} x [1, 3]; R_2 = disk plus {0} x (-2, -1]."""
    space = glued_space()
    sites = [np.array([[0.0, 3.0]]), np.array([[0.0, -3.0]])]
    regions = [
        GluedSet(1.0, 3.0),
        GluedSet(-2.0, -1.0, lo_closed=False, disk=True),
    ]
    return space, sites, regions


GLUED_NEUTRAL = GluedSet(-1.0, 1.0, lo_closed=False, hi_closed=False)


def sample_glued(n, rng):
    """Points of the glued world: half on the segment, half in the disk, plus landmarks."""
    world = glued_space().world
    landmarks = np.array(
        [[0, 3], [0, 1], [0, -1], [0, 0], [0, -2], [0, -3], [0, -4], [1, -3], [0, 2.999]],
        dtype=float,
    )
    n_seg = (n - len(landmarks)) // 2
    n_disk = n - len(landmarks) - n_seg
    s = world.segment_hi - rng.random(n_seg) * (world.segment_hi - world.segment_lo)
    seg = np.column_stack([np.zeros(n_seg), s])
    ang = rng.random(n_disk) * 2 * np.pi
    rad = np.sqrt(rng.random(n_disk)) * world.disk_radius
    c = np.asarray(world.disk_center)
    disk = np.column_stack([c[0] + rad * np.cos(ang), c[1] + rad * np.sin(ang)])
    return np.vstack([landmarks, seg, disk])


@dataclass
class AnalyticCheck:
    samples: int
    territory_violations: int
    zone_violations: int
    neutral_mismatches: int
    shell_violations: list
    separation: float
    separation_bound: float
    betas: list

    @property
    def is_zone(self):
        return self.zone_violations == 0


def check_analytic(space: Space, sites, regions, X, expected_neutral=None) -> AnalyticCheck:
    """Evaluate Dom membership of closed-form regions at sample points ``X``."""
    K = len(regions)
    inside = [R.contains(X) for R in regions]
    dist = [R.distance(X) for R in regions]
    terr = zone = 0
    for k in range(K):
        d_site = space.point_to_set(X, sites[k])
        d_other = np.min([dist[j] for j in range(K) if j != k], axis=0)
        dom = d_site <= d_other
        terr += int((inside[k] & ~dom).sum())
        zone += int((inside[k] != dom).sum())
    neutral = ~np.logical_or.reduce(inside)
    mism = 0 if expected_neutral is None else int((neutral != expected_neutral.contains(X)).sum())
    r = np.array(
        [min(space.set_distance(sites[k], sites[j]) for j in range(K) if j != k) for k in range(K)]
    )
    betas = shell_radii(r, Kind.TERRITORY)
    shell_viol = [int((~inside[k] & (dist[k] < betas[k]) & ~neutral).sum()) for k in range(K)]
    sep = min(regions[k].set_distance(regions[j]) for k in range(K) for j in range(k + 1, K))
    bound = max(separation_bound(r, k, j, Kind.TERRITORY) for k in range(K) for j in range(k + 1, K))
    return AnalyticCheck(len(X), terr, zone, mism, shell_viol, sep, bound, betas.tolist())
