import warnings

import numpy as np
import pytest

from regconv.data_model import RegionRecord
from regconv.errors import DimensionMismatch, NonPositiveCutoff
from regconv.weights import (
    DEFAULT_CUTOFF_KM,
    SpatialWeights,
    connectivity_report,
    distance_band_weights,
    load_weights,
    row_standardize,
    save_weights,
    spatial_lag_vector,
)

from conftest import line_graph_weights
from oracles import components_unionfind, spatial_lag_bruteforce


def regions_at(*coords):
    return [RegionRecord(f"R{i}", f"Region {i}", x, y) for i, (x, y) in enumerate(coords)]


def test_default_cutoff_constant():
    assert DEFAULT_CUTOFF_KM == 97.0


def test_pair_inside_band():
    W = distance_band_weights(regions_at((0, 0), (50, 0)), cutoff_km=97)
    assert W.w[0, 1] == 1.0 and W.w[1, 0] == 1.0


def test_pair_outside_band_gives_islands():
    W = distance_band_weights(regions_at((0, 0), (100, 0)), cutoff_km=97)
    assert np.all(W.w == 0)
    assert W.islands() == ["R0", "R1"]


def test_tie_at_cutoff_included():
    W = distance_band_weights(regions_at((0, 0), (97, 0)), cutoff_km=97)
    assert W.w[0, 1] == 1.0


def test_nonpositive_cutoff_rejected():
    with pytest.raises(NonPositiveCutoff):
        distance_band_weights(regions_at((0, 0), (1, 0)), cutoff_km=0)


def test_duplicate_coordinates_flagged():
    with pytest.warns(UserWarning, match="duplicate coordinates"):
        distance_band_weights(regions_at((5, 5), (5, 5), (50, 0)), cutoff_km=97)


def test_band_matrix_symmetric():
    rng = np.random.default_rng(11)
    regs = regions_at(*[(rng.uniform(0, 200), rng.uniform(0, 200)) for _ in range(25)])
    W = distance_band_weights(regs, cutoff_km=60)
    assert np.array_equal(W.w, W.w.T)


def test_shrinking_cutoff_never_adds_edges():
    rng = np.random.default_rng(12)
    regs = regions_at(*[(rng.uniform(0, 200), rng.uniform(0, 200)) for _ in range(20)])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        small = distance_band_weights(regs, cutoff_km=40).w > 0
        large = distance_band_weights(regs, cutoff_km=90).w > 0
    assert not np.any(small & ~large)


def test_row_standardize_examples():
    ids = ["a", "b"]
    W = SpatialWeights(np.array([[0.0, 1.0], [1.0, 0.0]]), ids)
    assert np.array_equal(row_standardize(W).w, W.w)

    ids3 = ["a", "b", "c"]
    W3 = SpatialWeights(np.array([[0, 2, 2], [1, 0, 0], [0, 3, 0]], dtype=float), ids3)
    expected = np.array([[0, 0.5, 0.5], [1, 0, 0], [0, 1, 0]])
    assert np.allclose(row_standardize(W3).w, expected)


def test_row_standardize_keeps_island_row_zero():
    ids3 = ["a", "b", "c"]
    W = SpatialWeights(np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=float), ids3)
    with pytest.warns(UserWarning, match="island"):
        Ws = row_standardize(W)
    assert np.all(Ws.w[2] == 0)
    assert Ws.islands() == ["c"]


def test_row_standardize_idempotent():
    rng = np.random.default_rng(4)
    for _ in range(10):
        raw = rng.uniform(0, 3, size=(8, 8)) * (rng.random((8, 8)) < 0.4)
        np.fill_diagonal(raw, 0.0)
        W = SpatialWeights(raw, [f"r{i}" for i in range(8)])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            once = row_standardize(W)
            twice = row_standardize(once)
        assert np.array_equal(once.w, twice.w)


def test_lag_bounded_by_value_range_after_standardization():
    rng = np.random.default_rng(9)
    for seed in range(5):
        raw = rng.uniform(0, 2, size=(10, 10)) * (rng.random((10, 10)) < 0.5)
        np.fill_diagonal(raw, 0.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            W = row_standardize(SpatialWeights(raw, [f"r{i}" for i in range(10)]))
        x = rng.normal(size=10)
        lag = W.lag(x)
        non_island = W.w.sum(axis=1) > 0
        assert np.all(lag[non_island] <= x.max() + 1e-12)
        assert np.all(lag[non_island] >= x.min() - 1e-12)


def test_connectivity_complete_graph():
    W = distance_band_weights(regions_at((0, 0), (10, 0), (0, 10)), cutoff_km=97)
    rep = connectivity_report(W)
    assert rep.n_components == 1
    assert rep.islands == []
    assert all(c == 2 for c in rep.neighbor_counts.values())


def test_connectivity_all_islands():
    W = SpatialWeights(np.zeros((3, 3)), ["a", "b", "c"])
    rep = connectivity_report(W)
    assert rep.n_components == 3
    assert rep.islands == ["a", "b", "c"]


def test_connectivity_two_cliques_matches_unionfind():
    # two 2-region cliques with no cross links
    regs = regions_at((0, 0), (10, 0), (500, 0), (510, 0))
    W = distance_band_weights(regs, cutoff_km=97)
    rep = connectivity_report(W)
    assert rep.n_components == components_unionfind(W.w > 0) == 2


def test_connectivity_random_matches_unionfind():
    rng = np.random.default_rng(21)
    for seed in range(8):
        raw = (rng.random((12, 12)) < 0.12).astype(float)
        raw = np.triu(raw, 1)
        raw = raw + raw.T
        W = SpatialWeights(raw, [f"r{i}" for i in range(12)])
        assert connectivity_report(W).n_components == components_unionfind(raw > 0)


def test_lag_zero_matrix():
    W = SpatialWeights(np.zeros((3, 3)), ["a", "b", "c"])
    assert np.all(spatial_lag_vector(W, np.array([1.0, 2.0, 3.0])) == 0)


def test_lag_preserves_constants():
    W = line_graph_weights(5)
    lag = spatial_lag_vector(W, np.full(5, 4.2))
    assert np.allclose(lag, 4.2)


def test_lag_line_graph_matches_bruteforce():
    W = line_graph_weights(4)
    x = np.array([1.0, -1.0, 1.0, -1.0])
    expected = spatial_lag_bruteforce(W.w, x)
    assert np.allclose(spatial_lag_vector(W, x), expected)
    # the O(n^2) loop on the standardized path graph gives [-1, 1, -1, 1]
    assert np.allclose(expected, [-1.0, 1.0, -1.0, 1.0])


def test_lag_random_matches_bruteforce():
    rng = np.random.default_rng(33)
    for _ in range(5):
        raw = rng.uniform(0, 1, size=(9, 9)) * (rng.random((9, 9)) < 0.5)
        np.fill_diagonal(raw, 0.0)
        W = SpatialWeights(raw, [f"r{i}" for i in range(9)])
        x = rng.normal(size=9)
        assert np.allclose(W.lag(x), spatial_lag_bruteforce(raw, x), atol=1e-12)


def test_lag_dimension_mismatch():
    W = line_graph_weights(4)
    with pytest.raises(DimensionMismatch):
        W.lag(np.ones(5))


def test_save_load_roundtrip(tmp_path):
    W = line_graph_weights(5)
    save_weights(W, tmp_path / "w.csv")
    loaded = load_weights(tmp_path / "w.csv")
    assert loaded.region_ids == W.region_ids
    assert loaded.row_standardized == W.row_standardized
    assert loaded.cutoff_km == W.cutoff_km
    assert np.array_equal(loaded.w, W.w)
