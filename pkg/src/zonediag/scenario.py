"""Scenario files: TOML documents validated into typed models.

Unknown keys anywhere are rejected. See README for the grammar.
"""
from __future__ import annotations

import sys
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .sites import FamilyName
from .space import Norm

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_GRID = {1: 1201, 2: 512, 3: 96}


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Analysis(str, Enum):
    VORONOI = "voronoi"
    ZONE = "zone"
    CLASSIFY = "classify"
    NEUTRAL = "neutral"
    SEPARATION = "separation"
    CHALLENGE = "challenge"
    MEASURE = "measure"
    DENSITY = "density"
    TERRITORY = "territory"
    ATTAINMENT = "attainment"
    GLUED = "glued"
    CASES = "cases"


class SpaceSpec(Strict):
    kind: Literal["box", "finite", "interval", "glued"] = "box"
    lo: Optional[list[float]] = None
    hi: Optional[list[float]] = None
    norm: Norm = Norm.L2
    points: Optional[list[list[float]]] = None
    n: Optional[int] = Field(default=None, ge=2)

    @model_validator(mode="after")
    def _shape(self):
        if self.kind in ("box", "interval"):
            if self.lo is None or self.hi is None or len(self.lo) != len(self.hi):
                raise ValueError(f"a {self.kind} space needs lo and hi of equal length")
        if self.kind == "box" and not 1 <= len(self.lo) <= 3:
            raise ValueError("box worlds are rasterised in 1 to 3 dimensions")
        if self.kind == "interval" and (len(self.lo) != 1 or self.n is None):
            raise ValueError("an interval world needs one-dimensional lo, hi and a point count n")
        if self.kind == "finite" and not self.points:
            raise ValueError("a finite world needs points")
        return self


class LatticeSpec(Strict):
    lo: list[float]
    pitch: float = Field(gt=0)
    count: list[int]

    @model_validator(mode="after")
    def _dims(self):
        if len(self.lo) != len(self.count) or min(self.count) < 1:
            raise ValueError("lattice lo and count must match and counts be positive")
        return self


class SitesSpec(Strict):
    points: Optional[list[list[list[float]]]] = None
    lattice: Optional[LatticeSpec] = None
    family: Optional[FamilyName] = None

    @model_validator(mode="after")
    def _one(self):
        given = [x is not None for x in (self.points, self.lattice, self.family)]
        if sum(given) != 1:
            raise ValueError("give exactly one of sites.points, sites.lattice, sites.family")
        return self


class GridSpec(Strict):
    n: Optional[int | list[int]] = None

    @model_validator(mode="after")
    def _sizes(self):
        sizes = [self.n] if isinstance(self.n, int) else (self.n or [])
        if any(v < 2 for v in sizes):
            raise ValueError("grid sizes must be at least 2")
        return self


class IterationSpec(Strict):
    max_iter: int = Field(default=200, ge=1)
    diagram: Literal["even", "odd", "mixed"] = "even"


class ChallengeSpec(Strict):
    samples: int = Field(default=100, ge=1)


class MeasureSpec(Strict):
    omega: float = Field(gt=0)
    rho: Optional[float] = Field(default=None, gt=0)
    directions: int = Field(default=100_000, ge=1000)
    cell: Optional[int] = None


class DensitySpec(Strict):
    omega: float = Field(gt=0)
    n: int = Field(default=256, ge=2)


class TerritorySpec(Strict):
    construction: Literal["first_cell"] = "first_cell"


class AttainmentSpec(Strict):
    k_max: int = Field(default=1000, ge=1)
    queries: list[list[float]] = []
    expect_verdicts: list[Literal["attained", "not_attained", "undetermined"]] = []
    declared: list[list[float]] = []
    finitely_compact: Optional[bool] = None
    grid: bool = True

    @model_validator(mode="after")
    def _pairs(self):
        if self.expect_verdicts and len(self.expect_verdicts) != len(self.queries):
            raise ValueError("expect_verdicts must match queries one to one")
        return self


class GluedSpec(Strict):
    samples: int = Field(default=1000, ge=10)


Intervals = list[list[float]]


class CaseSpec(Strict):
    label: str
    op: Literal["dom", "dom2", "classify", "iterate", "challenge"]
    space: SpaceSpec
    sites: list[list[list[float]]]
    regions: Optional[list[Intervals]] = None
    expect: Optional[list[Intervals]] = None
    expect_odd: Optional[list[Intervals]] = None
    expect_class: Optional[dict[Literal["territory", "double_territory", "zone", "double_zone"], bool]] = None
    component: int = 0
    enlarge: Optional[list[float]] = None
    expect_violation: Optional[bool] = None


class ExpectSpec(Strict):
    voronoi_neutral: Optional[Literal["none", "some"]] = None
    zone_neutral: Optional[Literal["none", "some"]] = None
    territory: Optional[bool] = None
    double_territory: Optional[bool] = None
    zone: Optional[bool] = None
    double_zone: Optional[bool] = None
    unique_zone: Optional[bool] = None
    interior_regions: Optional[Literal["none", "some", "all"]] = None


class Scenario(Strict):
    name: str
    description: str = ""
    reproduces: str = ""
    seed: int = 0
    analyses: list[Analysis]
    space: Optional[SpaceSpec] = None
    sites: Optional[SitesSpec] = None
    grid: GridSpec = GridSpec()
    iteration: IterationSpec = IterationSpec()
    challenge: ChallengeSpec = ChallengeSpec()
    measure: Optional[MeasureSpec] = None
    density: Optional[DensitySpec] = None
    territory: TerritorySpec = TerritorySpec()
    attainment: AttainmentSpec = AttainmentSpec()
    glued: GluedSpec = GluedSpec()
    cases: list[CaseSpec] = []
    expect: ExpectSpec = ExpectSpec()

    @model_validator(mode="after")
    def _needs(self):
        wanted = set(self.analyses)
        raster = wanted - {Analysis.GLUED, Analysis.CASES}
        if raster and (self.space is None or self.space.kind != "box"):
            raise ValueError(f"analyses {sorted(a.value for a in raster)} need a box space")
        if raster - {Analysis.ATTAINMENT} and (self.sites is None or self.sites.family is not None):
            raise ValueError("raster analyses need explicit or lattice sites")
        if Analysis.ATTAINMENT in wanted and (self.sites is None or self.sites.family is None):
            raise ValueError("attainment needs sites.family")
        if Analysis.MEASURE in wanted and self.measure is None:
            raise ValueError("the measure analysis needs a [measure] table")
        if Analysis.DENSITY in wanted and self.density is None:
            raise ValueError("the density analysis needs a [density] table")
        if isinstance(self.grid.n, list) and self.dim is not None and len(self.grid.n) != self.dim:
            raise ValueError("grid.n needs one size per box dimension")
        if Analysis.CASES in wanted and not self.cases:
            raise ValueError("the cases analysis needs [[cases]] entries")
        return self

    @property
    def dim(self):
        return len(self.space.lo) if self.space and self.space.lo else None

    def grid_size(self, override=None):
        if override is not None:
            return override
        if self.grid.n is not None:
            return self.grid.n
        return DEFAULT_GRID[self.dim]


def parse(text: str) -> Scenario:
    return Scenario.model_validate(tomllib.loads(text))


def bundled_names():
    root = resources.files("zonediag") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def bundled_text(name: str) -> str:
    return (resources.files("zonediag") / "scenarios" / f"{name}.toml").read_text()


def load(source) -> Scenario:
    """A scenario from a file path or a bundled scenario name."""
    path = Path(source)
    if path.is_file():
        return parse(path.read_text())
    if str(source) in bundled_names():
        return parse(bundled_text(str(source)))
    raise FileNotFoundError(f"no scenario file or bundled scenario named {source!r}")
