import sys
import warnings
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from regconv.data_model import PanelDataset, RegionRecord
from regconv.weights import SpatialWeights, distance_band_weights, row_standardize


def line_graph_weights(n=4, standardized=True):
    """Path graph 1-2-...-n as binary band weights (unit spacing, cutoff 1)."""
    regions = [RegionRecord(f"R{i+1}", f"Region {i+1}", float(i), 0.0) for i in range(n)]
    W = distance_band_weights(regions, cutoff_km=1.0)
    return row_standardize(W) if standardized else W


def random_band_weights(n, seed, cutoff=30.0, side=100.0):
    """Row-standardized band weights on uniform random coordinates."""
    rng = np.random.default_rng(seed)
    regions = [
        RegionRecord(f"R{i}", "", float(rng.uniform(0, side)), float(rng.uniform(0, side)))
        for i in range(n)
    ]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        W = row_standardize(distance_band_weights(regions, cutoff_km=cutoff))
    return W


def make_panel(n_regions=6, sectors=("total",), years=(1995, 2002), seed=0, spread=200.0):
    """Synthetic panel with random positive productivities."""
    rng = np.random.default_rng(seed)
    regions = [
        RegionRecord(
            f"R{i}", f"Region {i}", float(rng.uniform(0, spread)), float(rng.uniform(0, spread))
        )
        for i in range(n_regions)
    ]
    observations = {}
    for sector in sectors:
        for year in years:
            for r in regions:
                observations[(r.region_id, sector, year)] = float(rng.lognormal(3.0, 0.4))
    return PanelDataset(regions, set(sectors), observations)


@pytest.fixture
def line4():
    return line_graph_weights(4)


@pytest.fixture
def line4_binary():
    return line_graph_weights(4, standardized=False)
