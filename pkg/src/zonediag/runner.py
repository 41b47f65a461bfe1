"""Executes a scenario: runs the requested analyses and writes artifacts and a check report."""
from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from . import measure, raster, zone
from .errors import PreconditionError
from .raster import Grid
from .regions import FiniteCarrier, RegionTuple, build
from .scenario import Analysis, CaseSpec, Scenario, SpaceSpec
from .sites import SiteTuple, builtin_family
from .space import Box, FinitePointSet, Space, glued_space
from .voronoi import accumulation_consistency, nearest_site_attainment, neutral_voronoi_mask, voronoi_cells

PASS, FAIL, UTD, INFO = "PASS", "FAIL", "UP-TO-DISCRETIZATION", "INFO"

ZONE_FAMILY = {
    Analysis.ZONE, Analysis.CLASSIFY, Analysis.NEUTRAL, Analysis.SEPARATION,
    Analysis.CHALLENGE, Analysis.MEASURE,
}


class Report:
    def __init__(self):
        self.lines = []

    def add(self, status, name, detail=""):
        self.lines.append((status, name, detail))

    def check(self, ok, name, detail=""):
        self.add(PASS if ok else FAIL, name, detail)

    def info(self, name, detail=""):
        self.add(INFO, name, detail)

    def status(self, st, name, detail=""):
        self.add({zone.Status.TRUE: PASS, zone.Status.UP_TO_DISCRETIZATION: UTD}.get(st, FAIL), name, detail)

    @property
    def failed(self):
        return any(s == FAIL for s, _, _ in self.lines)

    def text(self, header):
        body = [f"{s:<21} {n}" + (f": {d}" if d else "") for s, n, d in self.lines]
        counts = {s: sum(1 for x, _, _ in self.lines if x == s) for s in (PASS, UTD, FAIL)}
        tail = f"summary: {counts[PASS]} pass, {counts[UTD]} up-to-discretization, {counts[FAIL]} fail"
        return "\n".join(header + body + [tail]) + "\n"


def make_space(spec: SpaceSpec) -> Space:
    if spec.kind == "box":
        return Space(Box(tuple(spec.lo), tuple(spec.hi)), spec.norm)
    if spec.kind == "finite":
        return Space(FinitePointSet(np.asarray(spec.points, dtype=float)), spec.norm)
    if spec.kind == "interval":
        pts = np.linspace(spec.lo[0], spec.hi[0], spec.n)
        return Space(FinitePointSet(pts[:, None]), spec.norm)
    return glued_space()


def make_sites(sc: Scenario, space: Space) -> SiteTuple:
    s = sc.sites
    if s.points is not None:
        return SiteTuple(space, tuple(np.asarray(p, dtype=float) for p in s.points))
    lat = s.lattice
    axes = [lat.lo[i] + lat.pitch * np.arange(lat.count[i]) for i in range(len(lat.lo))]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lat.lo))
    return SiteTuple(space, tuple(p[None, :] for p in pts))


def _intervals_mask(carrier: FiniteCarrier, intervals, eps=1e-12):
    x = carrier.points[:, 0]
    mask = np.zeros(len(x), dtype=bool)
    for lo, hi in intervals:
        mask |= (x >= lo - eps) & (x <= hi + eps)
    return mask


def _describe(carrier, mask):
    x = carrier.points[mask, 0]
    if len(x) == 0:
        return "{}"
    if len(carrier.points) <= 16:
        return "{" + ", ".join(f"{v:g}" for v in x) + "}"
    # contiguous runs of world points, shown as closed intervals
    idx = np.flatnonzero(mask)
    runs, start = [], idx[0]
    for a, b in zip(idx[:-1], idx[1:]):
        if b != a + 1:
            runs.append((start, a))
            start = b
    runs.append((start, idx[-1]))
    P = carrier.points[:, 0]
    return " u ".join(f"[{P[a]:g},{P[b]:g}]" for a, b in runs)


class Runner:
    def __init__(self, sc: Scenario, out: Path, grid_n=None, max_iter=None, seed=None):
        self.sc = sc
        self.out = Path(out)
        self.grid_n = grid_n
        self.max_iter = max_iter or sc.iteration.max_iter
        self.seed = sc.seed if seed is None else seed
        self.report = Report()
        self.header = [f"scenario: {sc.name}"]
        if sc.reproduces:
            self.header.append(f"reproduces: {sc.reproduces}")
        self.header.append(f"seed: {self.seed}")
        self.trace = None
        self.R = None

    # -- helpers -----------------------------------------------------------

    def _path(self, name):
        self.out.mkdir(parents=True, exist_ok=True)
        return self.out / name

    def _image(self, masks, name):
        if self.grid.m == 2:
            raster.export_image(masks, self._path(name))

    def _dump(self, masks, stem):
        for k, m in enumerate(masks):
            raster.dump_mask(m, self._path(f"{stem}_{k}.mask"))

    def _write(self, name, text):
        self._path(name).write_text(text)

    # -- main --------------------------------------------------------------

    def run(self):
        sc = self.sc
        wanted = set(sc.analyses)
        t0 = time.perf_counter()
        raster_needed = wanted - {Analysis.GLUED, Analysis.CASES, Analysis.ATTAINMENT}
        if sc.space is not None and sc.space.kind == "box":
            self.space = make_space(sc.space)
            self.grid = Grid.over(self.space.world, sc.grid_size(self.grid_n))
            self.header.append(self.grid.header())
        if raster_needed:
            self.sites = make_sites(sc, self.space)
            self.ctx = build(self.space, self.sites, self.grid)
        order = [
            (Analysis.CASES, self.cases),
            (Analysis.GLUED, self.glued),
            (Analysis.ATTAINMENT, self.attainment),
            (Analysis.VORONOI, self.voronoi),
            (Analysis.DENSITY, self.density),
            (Analysis.TERRITORY, self.territory),
        ]
        for a, fn in order:
            if a in wanted:
                self._guard(fn, a)
        if wanted & ZONE_FAMILY:
            self._guard(self.zone, Analysis.ZONE)
            if self.R is not None:
                for a, fn in (
                    (Analysis.CLASSIFY, self.classify),
                    (Analysis.NEUTRAL, self.neutral),
                    (Analysis.SEPARATION, self.separation),
                    (Analysis.CHALLENGE, self.challenge),
                    (Analysis.MEASURE, self.measure),
                ):
                    if a in wanted:
                        self._guard(fn, a)
        self.header.append(f"elapsed: {time.perf_counter() - t0:.2f} s")
        self._write("report.txt", self.report.text(self.header))
        return 1 if self.report.failed else 0

    def _guard(self, fn, analysis):
        try:
            fn()
        except PreconditionError as exc:
            self.report.add(FAIL, f"{analysis.value} precondition", f"{exc} [hypothesis: {exc.hypothesis}]")

    # -- analyses ----------------------------------------------------------

    def voronoi(self):
        cells = voronoi_cells(self.ctx)
        uncovered = int(cells.neutral().sum())
        self._image(cells.masks, "voronoi.ppm")
        self._dump(cells.masks, "voronoi")
        exp = self.sc.expect.voronoi_neutral
        detail = f"{uncovered} uncovered pixels"
        if exp is None:
            self.report.check(uncovered == 0, "voronoi cells cover the grid", detail)
        else:
            self.report.check((uncovered > 0) == (exp == "some"), f"voronoi neutral region {exp}", detail)

    def zone(self):
        keep = self.grid.m < 3
        tr = zone.iterate(self.ctx, self.max_iter, keep_all=keep)
        self.trace = tr
        self._write("trace.csv", "\n".join(tr.csv_lines()) + "\n")
        self.report.check(tr.converged, "iteration converged", f"{tr.steps} Dom steps, cap {self.max_iter}")
        self.report.check(
            tr.sandwich_ok, "even/odd sandwich chain holds pixel-exactly",
            "; ".join(tr.sandwich_failures) or f"{len(tr.evens)} even and {len(tr.odds)} odd iterates",
        )
        if not tr.converged:
            return
        which = self.sc.iteration.diagram
        if which == "even":
            R = tr.even_limit
        elif which == "odd":
            R = tr.odd_limit
        else:
            R = zone.two_site_zone(tr)
        self.R = R
        self.report.info("diagram", f"{which} limit, region pixels {R.counts()}")
        uz = tr.unique_zone
        if self.sc.expect.unique_zone is not None:
            self.report.check(uz == self.sc.expect.unique_zone, "even and odd limits coincide", str(uz))
        else:
            self.report.info("even and odd limits coincide", str(uz))
        n_neutral = int(R.neutral().sum())
        exp = self.sc.expect.zone_neutral
        if exp is not None:
            self.report.check((n_neutral > 0) == (exp == "some"), f"neutral region {exp}", f"{n_neutral} pixels")
        else:
            self.report.info("neutral pixels", str(n_neutral))
        self._image(R.masks, "zone.ppm")
        if which != "even":
            self._image(tr.even_limit.masks, "zone_even.ppm")
        if which != "odd":
            self._image(tr.odd_limit.masks, "zone_odd.ppm")
        self._dump(R.masks, "region")
        raster.dump_mask(R.neutral(), self._path("neutral.mask"))

    def _classify_lines(self, R, label):
        cls = zone.classify(R)
        exp = self.sc.expect
        for name in ("territory", "double_territory", "zone", "double_zone"):
            rel = getattr(cls, name)
            want = getattr(exp, name)
            detail = f"{rel.violations} violating pixels, boundary budget {rel.budget}"
            title = f"{label} is a {name.replace('_', ' ')} diagram"
            if want is None:
                self.report.info(title, f"{rel.status.value}; {detail}")
            elif want:
                self.report.status(rel.status, title, detail)
            else:
                self.report.check(rel.status is zone.Status.FALSE, f"{label} is not a {name.replace('_', ' ')} diagram", detail)
        self.report.check(cls.consistent, f"{label} classification implications hold")
        return cls

    def classify(self):
        self.cls = self._classify_lines(self.R, "diagram")

    def _neutral_lines(self, R, cls, label):
        for kind in zone.Kind:
            holds = cls.is_territory if kind is zone.Kind.TERRITORY else cls.is_double_territory
            if not holds:
                self.report.info(f"{label} shells ({kind.value})", "not applicable: containment fails")
                continue
            nz = zone.neutral_zone(R, kind, cls)
            self.report.check(nz.nonempty, f"{label} neutral region nonempty ({kind.value})", f"{int(nz.neutral.sum())} pixels")
            beta = ", ".join(f"{b:.6g}" for b in nz.betas[:4]) + (" ..." if len(nz.betas) > 4 else "")
            v = sum(nz.shell_violations)
            st = zone.Status.TRUE if v == 0 else (
                zone.Status.UP_TO_DISCRETIZATION if v <= nz.budget else zone.Status.FALSE
            )
            self.report.status(st, f"{label} shells inside neutral region ({kind.value})",
                               f"beta = {beta}; {v} pixels outside, budget {nz.budget}")

    def neutral(self):
        cls = getattr(self, "cls", None) or zone.classify(self.R)
        self._neutral_lines(self.R, cls, "diagram")

    def separation(self):
        R = self.R
        cls = getattr(self, "cls", None) or zone.classify(R)
        for kind in zone.Kind:
            holds = cls.is_territory if kind is zone.Kind.TERRITORY else cls.is_double_territory
            if not holds:
                continue
            pairs = zone.separation_check(R, kind, cls)
            worst = min(pairs, key=lambda p: p.distance - p.bound)
            self.report.check(
                all(p.passed for p in pairs), f"region separation ({kind.value} bound)",
                f"{len(pairs)} pairs; tightest d={worst.distance:.6g} vs bound {worst.bound:.6g} - 2h",
            )
        tr = self.trace
        iterates = [(2 * i, E) for i, E in enumerate(tr.evens)] + [(2 * i + 1, O) for i, O in enumerate(tr.odds)]
        if self.grid.m == 3:
            iterates = [(None, tr.even_limit), (None, tr.odd_limit)]
        bad, n, tight = [], 0, np.inf
        for g, It in iterates:
            if g is not None and g < 2:
                continue
            for p in zone.separation_check(It, zone.Kind.DOUBLE_TERRITORY, check_class=False):
                n += 1
                tight = min(tight, p.distance - p.bound)
                if not p.passed:
                    bad.append(g)
        self.report.check(not bad, "iterate separation (r_k/8 + r_j/8 bound)",
                          f"{n} pair checks over stored iterates; min d - bound = {tight:.6g}")

    def challenge(self):
        tr = self.trace
        E = tr.even_limit
        if not E.subset_of(self.R):
            raise PreconditionError("the diagram does not contain the even limit", "diagram between the limits")
        pool = np.argwhere(tr.odd_limit.neutral() & self.R.neutral())
        if len(pool) == 0:
            self.report.info("equilibrium challenge", "no neutral pixels to enlarge into")
            return
        rng = np.random.default_rng(self.seed)
        n = self.sc.challenge.samples
        pick = rng.choice(len(pool), size=n, replace=len(pool) < n)
        ks = rng.integers(0, len(self.R), size=n)
        hits = 0
        for i, k in zip(pick, ks):
            A = self.R.carrier.empty()
            A[tuple(pool[i])] = True
            hits += zone.challenge_enlargement(self.R, int(k), A).violated
        self.report.check(hits == n, "single-point enlargements are all rejected", f"{hits} of {n} violated")

    def measure(self):
        spec = self.sc.measure
        rep = measure.concentration_report_raster(self.R, spec.omega, spec.rho)
        self._write("volume.csv", "\n".join(rep.csv_lines()) + "\n")
        self._write("volume.txt", rep.text() + "\n")
        J = rep.interior
        exp = self.sc.expect.interior_regions
        detail = f"{len(J)} of {len(rep.regions)}"
        if exp == "all":
            self.report.check(len(J) == len(rep.regions), "all regions are interior", detail)
        elif exp == "none":
            self.report.check(not J, "no interior region", detail)
        else:
            self.report.check(bool(J), "interior regions exist", detail)
        if J:
            worst = min(J, key=lambda g: g.vol_N - g.lower_bound + g.slack)
            self.report.check(rep.regions_pass, "vol(N_j) >= (c^m - 1) vol(R_j) - slack",
                              f"tightest j={worst.index}: {worst.vol_N:.6g} vs {worst.lower_bound:.6g} - {worst.slack:.3g}")
            self.report.check(rep.ratio_pass, "vol(F)/(vol(F)+vol(N)) <= c^-m + slack",
                              f"{rep.ratio:.6g} vs {rep.ratio_bound:.6g} + {rep.ratio_slack:.3g}")
        self.report.info("c^-m decay", " ".join(f"m={m}:{v:.6g}" for m, v in rep.decay))
        if spec.cell is not None:
            k = spec.cell
            rng = np.random.default_rng(self.seed)
            prof = measure.radial_profile(self.space, self.sites[k][0], self.sites.others(k), spec.directions, rng)
            vol, se = measure.radial_volume(prof)
            ref = measure.raster_cell_volume(self.grid, self.ctx.site_fields, k)
            rel = abs(vol - ref) / ref
            self.report.check(rel <= 0.02, f"radial volume of Voronoi cell {k} matches raster",
                              f"{vol:.6g} +- {se:.2g} vs {ref:.6g} ({100 * rel:.2f}%)")

    def density(self):
        spec = self.sc.density
        g = Grid.over(self.space.world, spec.n)
        rep = measure.density_check(self.space.world, self.sites, spec.omega, g)
        self.report.check(rep.center_ok, "deep point with margin (8/3) omega", f"{rep.center_margin:.6g}")
        self.report.check(rep.ball_ok, "every point within (2/3) omega of a site", f"sup gap {rep.max_gap:.6g} (incl. h)")
        if rep.margin_ok is not None:
            self.report.check(rep.margin_ok, "Voronoi cell near the deep point keeps margin omega",
                              f"site {rep.site}, margin {rep.cell_margin:.6g}")

    def territory(self):
        ctx = self.ctx
        D = zone.dom_step(RegionTuple.of_sites(ctx))
        T = RegionTuple(ctx, (D[0],) + tuple(P.copy() for P in ctx.site_masks[1:]))
        self._image(T.masks, "territory.ppm")
        self._dump(T.masks, "territory")
        cls = self._classify_lines(T, "tuple")
        self._neutral_lines(T, cls, "tuple")

    def attainment(self):
        spec = self.sc.attainment
        fam = builtin_family(self.sc.sites.family)
        if spec.grid and self.sc.space is not None and self.sc.space.kind == "box":
            neutral, undet = neutral_voronoi_mask(fam, self.grid, spec.k_max)
            raster.dump_mask(neutral, self._path("neutral_voronoi.mask"))
            if self.grid.m == 2:
                raster.export_image([~neutral & ~undet, undet], self._path("attainment.ppm"),
                                    colours=[(255, 255, 255), (128, 128, 128)])
            self.report.check(not undet.any(), "every pixel decided", f"{int(undet.sum())} undetermined")
            self.report.info("neutral Voronoi pixels", f"{int(neutral.sum())} of {neutral.size}")
        for i, q in enumerate(spec.queries):
            res = nearest_site_attainment(fam, q, spec.k_max)
            detail = f"{res.verdict.value}" + (
                f" inf={res.inf_value:.9g}" if res.inf_value is not None else f" site {res.index} d={res.distance:.9g}"
            )
            if spec.expect_verdicts:
                self.report.check(res.verdict.value == spec.expect_verdicts[i], f"attainment at {q}", detail)
            else:
                self.report.info(f"attainment at {q}", detail)
        if spec.declared or spec.finitely_compact is not None:
            samples = self.grid.points()[:: max(1, self.grid.size // 2000)] if hasattr(self, "grid") else []
            cons = accumulation_consistency(fam, spec.declared, samples, spec.k_max, spec.finitely_compact)
            self.report.check(cons.consistent, "accumulation points consistent with attainment",
                              "; ".join(cons.contradictions) or f"{cons.checked} points checked")

    def glued(self):
        space, sites, regions = zone.glued_tuple()
        X = zone.sample_glued(self.sc.glued.samples, np.random.default_rng(self.seed))
        chk = zone.check_analytic(space, sites, regions, X, zone.GLUED_NEUTRAL)
        n = chk.samples
        self.report.check(chk.zone_violations == 0, "glued tuple is a zone diagram", f"{chk.zone_violations} violations in {n} samples")
        self.report.check(chk.neutral_mismatches == 0, "neutral region is {0} x (-1, 1)", f"{chk.neutral_mismatches} mismatches")
        self.report.check(sum(chk.shell_violations) == 0, "shells inside neutral region", f"beta = {chk.betas}")
        self.report.check(chk.separation >= chk.separation_bound - 1e-9, "region separation (territory bound)",
                          f"d = {chk.separation:g}, bound {chk.separation_bound:g}")

    def cases(self):
        for case in self.sc.cases:
            self._case(case)

    def _case(self, case: CaseSpec):
        space = make_space(case.space)
        ctx = build(space, [np.asarray(p, dtype=float) for p in case.sites])
        car = ctx.carrier
        name = case.label
        if case.op == "iterate":
            tr = zone.iterate(ctx, 100)
            ok = tr.converged and tr.sandwich_ok
            if case.expect is not None:
                ok &= all(np.array_equal(_intervals_mask(car, e), m) for e, m in zip(case.expect, tr.even_limit.masks))
            if case.expect_odd is not None:
                ok &= all(np.array_equal(_intervals_mask(car, e), m) for e, m in zip(case.expect_odd, tr.odd_limit.masks))
            got = " / ".join(
                "(" + ", ".join(_describe(car, m) for m in L.masks) + ")" for L in (tr.even_limit, tr.odd_limit)
            )
            self.report.check(ok, name, f"even / odd limits {got}")
            if case.expect_class is not None:
                self._case_class(case, tr.even_limit)
            return
        R = RegionTuple(ctx, tuple(_intervals_mask(car, iv) for iv in case.regions))
        if case.op in ("dom", "dom2"):
            D = zone.dom_power(R, 1 if case.op == "dom" else 2)
            ok = all(np.array_equal(_intervals_mask(car, e), m) for e, m in zip(case.expect, D.masks))
            self.report.check(ok, name, "(" + ", ".join(_describe(car, m) for m in D.masks) + ")")
        elif case.op == "classify":
            self._case_class(case, R)
        else:
            A = car.mask_of_points(np.asarray(case.enlarge, dtype=float)[:, None])
            res = zone.challenge_enlargement(R, case.component, A)
            ok = case.expect_violation is None or res.violated == case.expect_violation
            detail = (
                f"witness {res.witness.tolist()}: d(x,P)={res.site_distance:g} > {res.other_distance:g}"
                if res.violated else "no violation"
            )
            self.report.check(ok, name, detail)

    def _case_class(self, case, R):
        cls = zone.classify(R)
        got = {k: getattr(cls, f"is_{k}") for k in ("territory", "double_territory", "zone", "double_zone")}
        ok = all(got[k] == v for k, v in case.expect_class.items()) and cls.consistent
        self.report.check(ok, case.label, ", ".join(f"{k}={v}" for k, v in got.items()))


def run_scenario(sc: Scenario, out, grid_n=None, max_iter=None, seed=None):
    runner = Runner(sc, out, grid_n, max_iter, seed)
    code = runner.run()
    return code, runner
