"""Regional panel data: loading, validation, and cross-section construction.

The panel holds per-region, per-sector, per-year labour productivity levels
plus projected planar coordinates (km) and optional regional covariates
(shares in [0, 1], e.g. schooling levels). The cross-section derives, for a
chosen sector and period, the annualized log growth rate and the log initial
level that the convergence regressions consume.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    InvalidNumeric,
    MissingColumn,
    MissingCovariate,
    MissingYear,
    NonPositiveProductivity,
    RaggedPanel,
    UnknownSector,
    ValidationError,
)

PANEL_COLUMNS = ("region_id", "region_name", "x_km", "y_km", "sector", "year", "productivity")


@dataclass(frozen=True)
class RegionRecord:
    """One region: opaque id, display name, projected planar coordinates."""

    region_id: str
    name: str
    x_km: float
    y_km: float


@dataclass
class PanelDataset:
    """Rectangular productivity panel with coordinates and covariates.

    ``observations`` maps (region_id, sector, year) to a strictly positive
    productivity level; within each sector every region covers the same set
    of years. ``covariates`` maps (region_id, covariate_name) to a share.
    """

    regions: list[RegionRecord]
    sectors: set[str]
    observations: dict[tuple[str, str, int], float]
    covariates: dict[tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self):
        ids = [r.region_id for r in self.regions]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ValidationError(f"duplicate region_id(s): {dup}")
        for r in self.regions:
            if not (math.isfinite(r.x_km) and math.isfinite(r.y_km)):
                raise ValidationError(f"non-finite coordinates for region {r.region_id!r}")
        for (rid, sector, year), value in self.observations.items():
            if not value > 0:
                raise NonPositiveProductivity(rid, sector, year, value)
        for (rid, name), value in self.covariates.items():
            if not (0.0 <= value <= 1.0):
                raise ValidationError(
                    f"covariate {name!r} for region {rid!r} outside [0, 1]: {value}"
                )
        self._check_rectangular()

    def _check_rectangular(self):
        for sector in self.sectors:
            year_sets = {}
            for rid, sec, year in self.observations:
                if sec == sector:
                    year_sets.setdefault(rid, set()).add(year)
            if not year_sets:
                continue
            reference = next(iter(year_sets.values()))
            for rid, years in year_sets.items():
                if years != reference:
                    raise RaggedPanel(
                        sector,
                        f"region {rid!r} has years {sorted(years)}, "
                        f"others have {sorted(reference)}",
                    )

    @property
    def region_ids(self) -> list[str]:
        return [r.region_id for r in self.regions]

    @property
    def n(self) -> int:
        return len(self.regions)

    def years(self, sector: str) -> list[int]:
        if sector not in self.sectors:
            raise UnknownSector(sector, self.sectors)
        return sorted({y for (_, sec, y) in self.observations if sec == sector})

    def productivity(self, sector: str, year: int) -> np.ndarray:
        """Productivity levels for one sector-year, in canonical region order."""
        if sector not in self.sectors:
            raise UnknownSector(sector, self.sectors)
        if year not in self.years(sector):
            raise MissingYear(year, sector)
        return np.array([self.observations[(rid, sector, year)] for rid in self.region_ids])

    def covariate_names(self) -> list[str]:
        return sorted({name for (_, name) in self.covariates})


@dataclass
class CrossSection:
    """One row per region: annualized growth, log initial level, covariates.

    ``region_ids`` fixes the canonical index order; any weights matrix used
    alongside this cross-section must share it.
    """

    region_ids: list[str]
    growth: np.ndarray
    log_initial: np.ndarray
    t0: int
    tT: int
    covariates: np.ndarray | None = None
    covariate_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.tT > self.t0:
            raise ValidationError(f"need tT > t0, got t0={self.t0}, tT={self.tT}")
        n = len(self.region_ids)
        if len(self.growth) != n or len(self.log_initial) != n:
            raise ValidationError("growth/log_initial length must match region count")

    @property
    def T(self) -> int:
        return self.tT - self.t0

    @property
    def n(self) -> int:
        return len(self.region_ids)


def _parse_float(raw: str, row: int, column: str, path) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise InvalidNumeric(raw, row, column, path) from None


def _parse_int(raw: str, row: int, column: str, path) -> int:
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise InvalidNumeric(raw, row, column, path) from None


def load_panel(path, schema: dict[str, str] | None = None) -> PanelDataset:
    """Load a long-format panel CSV and validate it.

    ``schema`` optionally maps the canonical column names
    (region_id, region_name, x_km, y_km, sector, year, productivity) to the
    actual header names in the file. UTF-8, header row required, '.' decimal
    separator.
    """
    colmap = {name: name for name in PANEL_COLUMNS}
    if schema:
        colmap.update(schema)

    regions: dict[str, RegionRecord] = {}
    observations: dict[tuple[str, str, int], float] = {}
    sectors: set[str] = set()

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for canonical in PANEL_COLUMNS:
            if colmap[canonical] not in header:
                raise MissingColumn(colmap[canonical], path)
        for lineno, row in enumerate(reader, start=2):
            rid = row[colmap["region_id"]].strip()
            name = row[colmap["region_name"]].strip()
            x_km = _parse_float(row[colmap["x_km"]], lineno, colmap["x_km"], path)
            y_km = _parse_float(row[colmap["y_km"]], lineno, colmap["y_km"], path)
            sector = row[colmap["sector"]].strip()
            year = _parse_int(row[colmap["year"]], lineno, colmap["year"], path)
            value = _parse_float(
                row[colmap["productivity"]], lineno, colmap["productivity"], path
            )
            if rid not in regions:
                regions[rid] = RegionRecord(rid, name, x_km, y_km)
            elif (regions[rid].x_km, regions[rid].y_km) != (x_km, y_km):
                raise ValidationError(
                    f"region {rid!r} has inconsistent coordinates (row {lineno} of {path})"
                )
            if not value > 0:
                raise NonPositiveProductivity(rid, sector, year, value)
            observations[(rid, sector, year)] = value
            sectors.add(sector)

    if not observations:
        raise ValidationError(f"no observations found in {path}")
    return PanelDataset(list(regions.values()), sectors, observations)


def load_covariates(panel: PanelDataset, path) -> PanelDataset:
    """Merge a wide-format covariate CSV (region_id, then one column per
    covariate) into a new panel. Regions absent from the panel are ignored."""
    covariates = dict(panel.covariates)
    known = set(panel.region_ids)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if "region_id" not in header:
            raise MissingColumn("region_id", path)
        names = [c for c in header if c != "region_id"]
        for lineno, row in enumerate(reader, start=2):
            rid = row["region_id"].strip()
            if rid not in known:
                continue
            for name in names:
                covariates[(rid, name)] = _parse_float(row[name], lineno, name, path)
    return PanelDataset(panel.regions, panel.sectors, panel.observations, covariates)


def build_cross_section(panel: PanelDataset, sector: str, t0: int, tT: int) -> CrossSection:
    """Annualized growth (1/T)*ln(P_T/P_0) and log initial level per region."""
    if sector not in panel.sectors:
        raise UnknownSector(sector, panel.sectors)
    years = panel.years(sector)
    for year in (t0, tT):
        if year not in years:
            raise MissingYear(year, sector)
    p0 = panel.productivity(sector, t0)
    pT = panel.productivity(sector, tT)
    span = tT - t0
    growth = np.log(pT / p0) / span
    return CrossSection(
        region_ids=panel.region_ids,
        growth=growth,
        log_initial=np.log(p0),
        t0=t0,
        tT=tT,
    )


def attach_covariates(cs: CrossSection, panel: PanelDataset, names: list[str]) -> CrossSection:
    """Append the named covariate columns to the cross-section, region order."""
    if not names:
        return cs
    columns = []
    for name in names:
        col = []
        for rid in cs.region_ids:
            if (rid, name) not in panel.covariates:
                raise MissingCovariate(rid, name)
            col.append(panel.covariates[(rid, name)])
        columns.append(col)
    X = np.array(columns).T
    if cs.covariates is not None:
        X = np.hstack([cs.covariates, X])
        names = cs.covariate_names + list(names)
    return replace(cs, covariates=X, covariate_names=list(names))
