"""Dominance regions, Voronoi cells and nearest-site attainment."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .raster import Grid
from .regions import RegionTuple, SiteContext, build
from .sites import AnalyticSiteFamily, Certificate, FiniteFamily, SiteTuple
from .space import Space


def in_dom(space: Space, P, A, x) -> bool:
    """x is in dom(P, A): d(x, P) <= d(x, A), with d(x, empty) = +inf."""
    P = np.asarray(P, dtype=float)
    if P.size == 0:
        raise ValueError("dom(P, A) needs a nonempty P")
    dP = space.point_to_set(np.atleast_2d(x), P)[0]
    dA = space.point_to_set(np.atleast_2d(x), A)[0]
    return bool(dP <= dA)


def voronoi_cells(sites, carrier=None) -> RegionTuple:
    """Voronoi cells over a finite world or grid; tied points join every minimising cell.

    ``sites`` is a :class:`SiteContext` (from :func:`zonediag.regions.build`)
    or a :class:`SiteTuple`, in which case ``carrier`` is the grid to use
    (ignored for finite worlds).
    """
    ctx = sites if isinstance(sites, SiteContext) else build(sites.space, sites, carrier)
    fields = ctx.site_fields
    best = np.minimum.reduce(fields)
    return RegionTuple(ctx, tuple(f == best for f in fields))


# ---------------------------------------------------------------------------
# attainment


class Verdict(str, Enum):
    ATTAINED = "attained"
    NOT_ATTAINED = "not_attained"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class AttainmentResult:
    verdict: Verdict
    index: int | None = None
    distance: float | None = None
    inf_value: float | None = None
    tail_bound: float | None = None

    @property
    def attained(self):
        return self.verdict is Verdict.ATTAINED


def _attainment_arrays(family: AnalyticSiteFamily, X, K_max):
    prof = family.profiles(X, K_max)
    j = prof.argmin(axis=1)
    best = prof[np.arange(len(X)), j]
    tail = family.tail_inf(X, K_max)
    attained = best <= tail
    certified = family.certified(X) if family.certificate is Certificate.STRICTLY_DECREASING else np.zeros(len(X), bool)
    not_attained = certified & ~attained
    return j + 1, best, tail, attained, not_attained


def nearest_site_attainment(family, x, K_max=1000) -> AttainmentResult:
    """Decide whether inf_k d(x, P_k) is attained.

    Finite tuples are always attained (``index`` is the tuple position).
    Families are attained when the best of the first ``K_max`` profiles is no
    larger than the exact tail infimum; non-attainment is only reported where
    the family's certificate covers ``x``; anything else is undetermined.
    """
    if K_max < 1:
        raise ValueError("K_max must be at least 1")
    X = np.atleast_2d(np.asarray(x, dtype=float))
    if isinstance(family, SiteTuple):
        d = np.array([family.space.point_to_set(X, P)[0] for P in family.sites])
        j = int(d.argmin())
        return AttainmentResult(Verdict.ATTAINED, j, float(d[j]))
    j, best, tail, att, nott = _attainment_arrays(family, X, K_max)
    if att[0]:
        return AttainmentResult(Verdict.ATTAINED, int(j[0]), float(best[0]), tail_bound=float(tail[0]))
    if nott[0]:
        return AttainmentResult(Verdict.NOT_ATTAINED, inf_value=float(tail[0]))
    return AttainmentResult(Verdict.UNDETERMINED, int(j[0]), float(best[0]), tail_bound=float(tail[0]))


def neutral_voronoi_mask(family, grid: Grid, K_max=1000, chunk=4096):
    """(neutral, undetermined) masks: pixels NotAttained, and pixels left undecided."""
    if isinstance(family, SiteTuple):
        family = FiniteFamily(family)
    X = grid.points()
    neutral = np.zeros(len(X), dtype=bool)
    undetermined = np.zeros(len(X), dtype=bool)
    for s in range(0, len(X), chunk):
        _, _, _, att, nott = _attainment_arrays(family, X[s : s + chunk], K_max)
        neutral[s : s + chunk] = nott
        undetermined[s : s + chunk] = ~att & ~nott
    return neutral.reshape(grid.shape), undetermined.reshape(grid.shape)


@dataclass
class ConsistencyReport:
    consistent: bool
    contradictions: list = field(default_factory=list)
    checked: int = 0


def accumulation_consistency(family, declared_accumulation_points, samples, K_max=1000, finitely_compact=None):
    """Cross-check declared accumulation points against attainment verdicts.

    * An external accumulation point of the union of (closed) sites has no
      nearest site, so it must not come out Attained.
    * With no accumulation points in a finitely compact space there is no
      neutral region, so no sample may come out NotAttained.
    """
    if finitely_compact is None:
        finitely_compact = family.finitely_compact
    report = ConsistencyReport(True)
    for y in declared_accumulation_points:
        res = nearest_site_attainment(family, y, K_max)
        report.checked += 1
        if res.attained:
            report.contradictions.append(
                f"declared accumulation point {np.asarray(y).tolist()} has nearest site {res.index}"
            )
    if not len(declared_accumulation_points) and finitely_compact:
        for x in samples:
            res = nearest_site_attainment(family, x, K_max)
            report.checked += 1
            if res.verdict is Verdict.NOT_ATTAINED:
                report.contradictions.append(
                    f"sample {np.asarray(x).tolist()} has no nearest site although the sites "
                    "have no accumulation point in a finitely compact space"
                )
    report.consistent = not report.contradictions
    return report
