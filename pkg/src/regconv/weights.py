"""Spatial weights: distance-band construction, row standardization, queries.

The default neighbourhood definition is a binary band on euclidean distance
between projected planar coordinates: regions within ``cutoff_km`` of each
other (boundary included) are neighbours with weight 1. An inverse-distance
variant is available behind a flag. Regions with no neighbours (islands) are
kept as all-zero rows and reported, not rejected.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .data_model import RegionRecord
from .errors import DimensionMismatch, NonPositiveCutoff, ValidationError

DEFAULT_CUTOFF_KM = 97.0

_ROW_SUM_TOL = 1e-12


@dataclass
class SpatialWeights:
    """n-by-n nonnegative weight matrix with zero diagonal.

    ``region_ids`` fixes the index order; it must match the cross-section
    the weights are used with.
    """

    w: np.ndarray
    region_ids: list[str]
    row_standardized: bool = False
    cutoff_km: float | None = None

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        n = len(self.region_ids)
        if self.w.shape != (n, n):
            raise DimensionMismatch((n, n), self.w.shape, "weights matrix shape")
        if not np.all(np.isfinite(self.w)):
            raise ValidationError("weights must be finite")
        if np.any(self.w < 0):
            raise ValidationError("weights must be nonnegative")
        if np.any(np.diag(self.w) != 0):
            raise ValidationError("weights diagonal must be zero")
        if self.row_standardized:
            sums = self.w.sum(axis=1)
            bad = np.abs(sums - 1.0) > _ROW_SUM_TOL
            bad &= sums != 0.0
            if np.any(bad):
                raise ValidationError("row-standardized rows must sum to 1 (or 0 for islands)")

    @property
    def n(self) -> int:
        return len(self.region_ids)

    @property
    def s0(self) -> float:
        """Sum of all weights."""
        return float(self.w.sum())

    def islands(self) -> list[str]:
        sums = self.w.sum(axis=1)
        return [rid for rid, s in zip(self.region_ids, sums) if s == 0.0]

    def lag(self, x: np.ndarray) -> np.ndarray:
        """Spatial lag W·x (island rows give 0)."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionMismatch(self.n, len(x))
        return self.w @ x


@dataclass
class ConnectivityReport:
    neighbor_counts: dict[str, int]
    islands: list[str]
    n_components: int
    cutoff_km: float | None = None

    def to_dict(self) -> dict:
        return {
            "n": len(self.neighbor_counts),
            "cutoff_km": self.cutoff_km,
            "neighbor_counts": self.neighbor_counts,
            "islands": self.islands,
            "n_components": self.n_components,
        }


def pairwise_distances(regions: list[RegionRecord]) -> np.ndarray:
    xy = np.array([[r.x_km, r.y_km] for r in regions])
    diff = xy[:, None, :] - xy[None, :, :]
    return np.sqrt((diff**2).sum(axis=2))


def distance_band_weights(
    regions: list[RegionRecord],
    cutoff_km: float = DEFAULT_CUTOFF_KM,
    inverse_distance: bool = False,
) -> SpatialWeights:
    """Binary (or inverse-distance) band weights on euclidean km distance.

    w_ij = 1 if 0 < d(i,j) <= cutoff_km else 0; with ``inverse_distance``,
    in-band entries are 1/d(i,j) instead. Symmetric, not row-standardized.
    """
    if not cutoff_km > 0:
        raise NonPositiveCutoff(cutoff_km)
    if len(regions) < 2:
        raise ValidationError("need at least 2 regions to build weights")

    dist = pairwise_distances(regions)
    n = len(regions)
    offdiag = ~np.eye(n, dtype=bool)
    dup = offdiag & (dist == 0.0)
    if np.any(dup):
        i, j = np.argwhere(dup)[0]
        warnings.warn(
            f"duplicate coordinates: regions {regions[i].region_id!r} and "
            f"{regions[j].region_id!r} are 0 km apart",
            stacklevel=2,
        )

    in_band = offdiag & (dist > 0.0) & (dist <= cutoff_km)
    if inverse_distance:
        w = np.zeros_like(dist)
        w[in_band] = 1.0 / dist[in_band]
    else:
        w = in_band.astype(float)
    return SpatialWeights(
        w=w,
        region_ids=[r.region_id for r in regions],
        row_standardized=False,
        cutoff_km=cutoff_km,
    )


def row_standardize(W: SpatialWeights) -> SpatialWeights:
    """Divide each nonzero row by its sum; zero (island) rows stay zero.

    Idempotent. Islands trigger a warning, never an error.
    """
    if W.row_standardized:
        return W
    sums = W.w.sum(axis=1)
    islands = sums == 0.0
    if np.any(islands):
        names = [rid for rid, isl in zip(W.region_ids, islands) if isl]
        warnings.warn(f"{len(names)} island region(s) with no neighbors: {names}", stacklevel=2)
    scale = np.where(islands, 1.0, sums)
    w = W.w / scale[:, None]
    return SpatialWeights(
        w=w,
        region_ids=list(W.region_ids),
        row_standardized=True,
        cutoff_km=W.cutoff_km,
    )


def connectivity_report(W: SpatialWeights) -> ConnectivityReport:
    """Neighbour counts, island list, and connected components of the
    binary adjacency graph underlying W."""
    adjacency = (W.w > 0) | (W.w.T > 0)
    counts = {
        rid: int(c) for rid, c in zip(W.region_ids, (W.w > 0).sum(axis=1))
    }
    n_components, _ = connected_components(csr_matrix(adjacency), directed=False)
    return ConnectivityReport(
        neighbor_counts=counts,
        islands=W.islands(),
        n_components=int(n_components),
        cutoff_km=W.cutoff_km,
    )


def spatial_lag_vector(W: SpatialWeights, x: np.ndarray) -> np.ndarray:
    """Return W·x."""
    return W.lag(x)


def save_weights(W: SpatialWeights, csv_path, sidecar_path=None) -> None:
    """Write the nonzero entries as an edge list CSV plus a JSON sidecar.

    Edge columns: region_i, region_j, weight. The sidecar records n,
    cutoff_km, row_standardized, islands, and the region index order.
    """
    csv_path = Path(csv_path)
    sidecar_path = Path(sidecar_path) if sidecar_path else csv_path.with_suffix(".json")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["region_i", "region_j", "weight"])
        for i, rid_i in enumerate(W.region_ids):
            for j, rid_j in enumerate(W.region_ids):
                if W.w[i, j] != 0.0:
                    writer.writerow([rid_i, rid_j, repr(float(W.w[i, j]))])
    meta = {
        "n": W.n,
        "cutoff_km": W.cutoff_km,
        "row_standardized": W.row_standardized,
        "islands": W.islands(),
        "region_ids": list(W.region_ids),
    }
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def load_weights(csv_path, sidecar_path=None) -> SpatialWeights:
    """Rebuild a SpatialWeights from an edge list CSV and its JSON sidecar."""
    csv_path = Path(csv_path)
    sidecar_path = Path(sidecar_path) if sidecar_path else csv_path.with_suffix(".json")
    with open(sidecar_path, encoding="utf-8") as fh:
        meta = json.load(fh)
    region_ids = meta["region_ids"]
    index = {rid: i for i, rid in enumerate(region_ids)}
    w = np.zeros((len(region_ids), len(region_ids)))
    with open(csv_path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            w[index[row["region_i"]], index[row["region_j"]]] = float(row["weight"])
    return SpatialWeights(
        w=w,
        region_ids=region_ids,
        row_standardized=bool(meta["row_standardized"]),
        cutoff_km=meta["cutoff_km"],
    )
