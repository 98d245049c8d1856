import numpy as np
import pytest

from regconv.data_model import RegionRecord
from regconv.errors import DegenerateVariance, EmptyWeights, NotRowStandardized
from regconv.esda import lisa_classify, moran_global, moran_local, moran_scatter
from regconv.weights import SpatialWeights, distance_band_weights, row_standardize

from conftest import line_graph_weights, random_band_weights
from oracles import moran_global_bruteforce, moran_local_bruteforce


def test_line_graph_global_I_is_minus_one(line4):
    x = np.array([1.0, -1.0, 1.0, -1.0])
    res = moran_global(x, line4, permutations=0)
    assert res.I == pytest.approx(-1.0, abs=1e-12)
    assert res.expected == pytest.approx(-1.0 / 3.0, abs=1e-15)


def test_expected_value_exact():
    for n in (4, 10, 28):
        W = line_graph_weights(n)
        x = np.arange(n, dtype=float)
        res = moran_global(x, W, permutations=0)
        assert res.expected == -1.0 / (n - 1)
    # the 28-region case in decimal form
    assert -1.0 / 27 == pytest.approx(-0.037037, abs=5e-7)


def test_constant_variable_rejected(line4):
    with pytest.raises(DegenerateVariance):
        moran_global(np.full(4, 2.5), line4, permutations=0)


def test_empty_weights_rejected():
    W = SpatialWeights(np.zeros((4, 4)), [f"r{i}" for i in range(4)])
    with pytest.raises(EmptyWeights):
        moran_global(np.array([1.0, 2.0, 3.0, 4.0]), W, permutations=0)


def test_global_matches_bruteforce_on_random_instances():
    rng = np.random.default_rng(17)
    for seed in range(20):
        n = int(rng.integers(4, 31))
        W = random_band_weights(n, seed, cutoff=45.0)
        x = rng.normal(size=n)
        res = moran_global(x, W, permutations=0)
        assert res.I == pytest.approx(moran_global_bruteforce(x, W.w), abs=1e-10)


def test_affine_invariance():
    rng = np.random.default_rng(8)
    W = random_band_weights(15, 2)
    x = rng.normal(size=15)
    base = moran_global(x, W, permutations=0).I
    for a, b in ((2.0, 0.0), (-3.0, 1.7), (0.5, -4.0)):
        assert moran_global(a * x + b, W, permutations=0).I == pytest.approx(base, abs=1e-12)


def test_permutation_determinism(line4):
    x = np.array([0.3, -1.2, 0.8, 0.1])
    a = moran_global(x, line4, permutations=199, seed=42)
    b = moran_global(x, line4, permutations=199, seed=42)
    assert a.p_perm == b.p_perm
    assert a.z_perm == b.z_perm
    c = moran_global(x, line4, permutations=199, seed=43)
    assert (c.p_perm, c.z_perm) != (a.p_perm, a.z_perm)


def test_seed_required_with_permutations(line4):
    with pytest.raises(Exception, match="seed"):
        moran_global(np.array([1.0, -1.0, 1.0, -1.0]), line4, permutations=99)


def test_local_line_graph_value(line4):
    x = np.array([1.0, -1.0, 1.0, -1.0])
    res = moran_local(x, line4, permutations=0)
    assert res.I_i[0] == pytest.approx(-0.25, abs=1e-12)
    assert np.allclose(res.I_i, moran_local_bruteforce(x, line4.w), atol=1e-12)


def test_local_island_zero_and_flagged():
    regions = [
        RegionRecord("a", "", 0.0, 0.0),
        RegionRecord("b", "", 10.0, 0.0),
        RegionRecord("c", "", 500.0, 0.0),
    ]
    with pytest.warns(UserWarning):
        W = row_standardize(distance_band_weights(regions, cutoff_km=97))
    x = np.array([1.0, 2.0, 5.0])
    res = moran_local(x, W, permutations=99, seed=1)
    assert res.quadrant[2] == "ISLAND"
    assert res.I_i[2] == 0.0
    assert res.p_i[2] == 1.0
    assert not res.significant[2]


def test_local_sum_identity_random():
    rng = np.random.default_rng(5)
    for seed in range(10):
        n = int(rng.integers(5, 25))
        W = random_band_weights(n, 100 + seed)
        x = rng.normal(size=n)
        glob = moran_global(x, W, permutations=0)
        loc = moran_local(x, W, permutations=0)
        assert glob.I == pytest.approx(loc.I_i.sum() * (n / W.s0), abs=1e-10)


def test_scatter_slope_equals_global_I():
    rng = np.random.default_rng(23)
    for seed in range(8):
        n = int(rng.integers(6, 30))
        W = random_band_weights(n, 200 + seed)
        x = rng.normal(size=n)
        scatter = moran_scatter(x, W)
        glob = moran_global(x, W, permutations=0)
        if not W.islands():  # n/S = 1 only without islands
            assert scatter.slope == pytest.approx(glob.I, abs=1e-10)


def test_scatter_line_graph(line4):
    x = np.array([1.0, -1.0, 1.0, -1.0])
    scatter = moran_scatter(x, line4)
    assert scatter.slope == pytest.approx(-1.0, abs=1e-12)


def test_scatter_quadrant_signs(line4):
    x = np.array([5.0, 4.0, 1.0, 0.0])
    scatter = moran_scatter(x, line4)
    for z, lag, quad in zip(scatter.z, scatter.lag, scatter.quadrant):
        if z > 0 and lag > 0:
            assert quad == "HH"
        if z <= 0 and lag <= 0:
            assert quad == "LL"


def test_scatter_requires_row_standardized(line4_binary):
    with pytest.raises(NotRowStandardized):
        moran_scatter(np.array([1.0, -1.0, 1.0, -1.0]), line4_binary)


def test_scatter_rejects_constant(line4):
    with pytest.raises(DegenerateVariance):
        moran_scatter(np.ones(4), line4)


def test_standardized_scatter_same_slope(line4):
    x = np.array([0.3, -1.2, 0.8, 0.1])
    plain = moran_scatter(x, line4, standardize=False)
    std = moran_scatter(x, line4, standardize=True)
    assert std.slope == pytest.approx(plain.slope, abs=1e-12)


def test_lisa_classify_decision_table(line4):
    x = np.array([0.3, -1.2, 0.8, 0.1])
    res = moran_local(x, line4, permutations=99, seed=3)
    res.p_i = np.array([0.01, 0.20, 0.04, 0.60])
    res.quadrant = ["HH", "LL", "LH", "HL"]
    classes = lisa_classify(res, alpha=0.05)
    assert classes == ["HH", "NOT_SIGNIFICANT", "LH", "NOT_SIGNIFICANT"]
    # boundary: significant iff p <= alpha
    res.p_i = np.array([0.05, 0.050001, 0.05, 0.05])
    assert lisa_classify(res, alpha=0.05)[1] == "NOT_SIGNIFICANT"
    assert lisa_classify(res, alpha=0.05)[0] == "HH"


def two_clique_weights(size=5):
    """Two complete cliques of `size` regions, far apart."""
    regions = []
    for i in range(size):
        regions.append(RegionRecord(f"A{i}", "", float(i * 5), 0.0))
    for i in range(size):
        regions.append(RegionRecord(f"B{i}", "", 10_000.0 + i * 5, 0.0))
    return row_standardize(distance_band_weights(regions, cutoff_km=50))


def test_two_clique_lisa_clusters():
    # block-constant extreme values force conditional-permutation p below alpha:
    # a clique member sees all-high (or all-low) neighbours, and only the
    # 1-in-C(9,4) draws reproducing that are as extreme
    W = two_clique_weights(5)
    x = np.array([10.0] * 5 + [1.0] * 5)
    res = moran_local(x, W, permutations=999, seed=11)
    classes = lisa_classify(res, alpha=0.05)
    assert classes == ["HH"] * 5 + ["LL"] * 5
    assert np.all(res.p_i < 0.05)
    # permutation oracle: the exact tie probability per draw is 1/C(9,4)
    exact = 1.0 / 126.0
    assert np.all(res.p_i > exact / 4)


def test_local_permutation_determinism():
    W = random_band_weights(10, 7)
    rng = np.random.default_rng(2)
    x = rng.normal(size=10)
    a = moran_local(x, W, permutations=99, seed=5)
    b = moran_local(x, W, permutations=99, seed=5)
    assert np.array_equal(a.p_i, b.p_i)
