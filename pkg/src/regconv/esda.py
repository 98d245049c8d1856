"""Exploratory spatial data analysis: global/local Moran statistics.

Inference is by conditional permutation with the (count + 1)/(draws + 1)
pseudo p-value estimator, two-sided around the null expectation. Each
permutation draw comes from its own named substream of the user seed, so
p-values are reproducible and independent of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVariance, DimensionMismatch, EmptyWeights, NotRowStandardized, ValidationError
from .rng import substream
from .weights import SpatialWeights

DEFAULT_PERMUTATIONS = 9999

QUADRANTS = ("HH", "LL", "HL", "LH")


@dataclass
class MoranGlobalResult:
    I: float
    expected: float
    z_perm: float | None
    p_perm: float | None
    n: int
    permutations: int
    seed: int | None

    def to_dict(self) -> dict:
        return {
            "I": self.I,
            "expected": self.expected,
            "z_perm": self.z_perm,
            "p_perm": self.p_perm,
            "n": self.n,
            "permutations": self.permutations,
            "seed": self.seed,
        }


@dataclass
class MoranLocalResult:
    region_ids: list[str]
    I_i: np.ndarray
    p_i: np.ndarray
    quadrant: list[str]
    significant: np.ndarray
    z: np.ndarray
    lag: np.ndarray
    alpha: float
    permutations: int
    seed: int | None


@dataclass
class ScatterData:
    region_ids: list[str]
    z: np.ndarray
    lag: np.ndarray
    quadrant: list[str]
    slope: float
    standardized: bool


def _check_variable(x: np.ndarray, W: SpatialWeights) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (W.n,):
        raise DimensionMismatch(W.n, len(x))
    if W.n < 3:
        raise ValidationError(f"need at least 3 regions, got {W.n}")
    if np.all(x == x[0]):
        raise DegenerateVariance()
    return x


def _quadrant_labels(z: np.ndarray, lag: np.ndarray, island_mask: np.ndarray) -> list[str]:
    labels = []
    for zi, li, isl in zip(z, lag, island_mask):
        if isl:
            labels.append("ISLAND")
        elif zi > 0:
            labels.append("HH" if li > 0 else "HL")
        else:
            labels.append("LL" if li <= 0 else "LH")
    return labels


def moran_global(
    x: np.ndarray,
    W: SpatialWeights,
    permutations: int = DEFAULT_PERMUTATIONS,
    seed: int | None = None,
) -> MoranGlobalResult:
    """Global Moran statistic with permutation inference.

    I = (n/S) * sum_ij w_ij (x_i-u)(x_j-u) / sum_i (x_i-u)^2, compared with
    its theoretical mean -1/(n-1). The permutation p-value counts draws whose
    distance from the mean is at least the observed one (two-sided).
    """
    x = _check_variable(x, W)
    n = W.n
    s0 = W.s0
    if s0 == 0.0:
        raise EmptyWeights()
    if permutations > 0 and seed is None:
        raise ValidationError("seed is required when permutations > 0")

    z = x - x.mean()
    m2 = float(z @ z)
    I = (n / s0) * float(z @ W.lag(z)) / m2
    expected = -1.0 / (n - 1)

    z_perm = None
    p_perm = None
    if permutations > 0:
        Z = np.empty((permutations, n))
        for k in range(permutations):
            rng = substream(seed, "moran-global", k)
            Z[k] = z[rng.permutation(n)]
        lags = Z @ W.w.T
        sims = (n / s0) * (Z * lags).sum(axis=1) / m2
        extreme = np.abs(sims - expected) >= abs(I - expected)
        p_perm = (int(extreme.sum()) + 1) / (permutations + 1)
        spread = float(sims.std())
        if spread == 0.0:
            z_perm = 0.0 if I == sims.mean() else float(np.sign(I - sims.mean()) * np.inf)
        else:
            z_perm = (I - float(sims.mean())) / spread

    return MoranGlobalResult(
        I=I,
        expected=expected,
        z_perm=z_perm,
        p_perm=p_perm,
        n=n,
        permutations=permutations,
        seed=seed,
    )


def moran_local(
    x: np.ndarray,
    W: SpatialWeights,
    permutations: int = DEFAULT_PERMUTATIONS,
    seed: int | None = None,
    alpha: float = 0.05,
) -> MoranLocalResult:
    """Local Moran decomposition with conditional permutation inference.

    I_i = (x_i-u) * sum_j w_ij (x_j-u) / sum_k (x_k-u)^2. Each region's own
    value stays fixed while the remaining n-1 values are permuted over its
    neighbours; p_i is two-sided around the exact conditional mean. Islands
    get I_i = 0, p_i = 1.
    """
    x = _check_variable(x, W)
    n = W.n
    if permutations > 0 and seed is None:
        raise ValidationError("seed is required when permutations > 0")

    z = x - x.mean()
    m2 = float(z @ z)
    lag = W.lag(z)
    I_i = z * lag / m2
    row_sums = W.w.sum(axis=1)
    island_mask = row_sums == 0.0

    p_i = np.ones(n)
    if permutations > 0:
        for i in range(n):
            if island_mask[i]:
                continue
            neighbors = np.flatnonzero(W.w[i] > 0)
            wts = W.w[i, neighbors]
            others = np.delete(z, i)
            k_i = len(neighbors)
            sims = np.empty(permutations)
            for k in range(permutations):
                rng = substream(seed, "moran-local", i, k)
                draw = others[rng.permutation(n - 1)[:k_i]]
                sims[k] = z[i] * float(wts @ draw) / m2
            # exact mean of I_i under conditional permutation
            e_i = -z[i] ** 2 * row_sums[i] / (m2 * (n - 1))
            extreme = np.abs(sims - e_i) >= abs(I_i[i] - e_i)
            p_i[i] = (int(extreme.sum()) + 1) / (permutations + 1)

    quadrant = _quadrant_labels(z, lag, island_mask)
    significant = (p_i <= alpha) & ~island_mask
    return MoranLocalResult(
        region_ids=list(W.region_ids),
        I_i=I_i,
        p_i=p_i,
        quadrant=quadrant,
        significant=significant,
        z=z,
        lag=lag,
        alpha=alpha,
        permutations=permutations,
        seed=seed,
    )


def moran_scatter(x: np.ndarray, W: SpatialWeights, standardize: bool = False) -> ScatterData:
    """Scatter of the mean-deviation variable against its spatial lag.

    The OLS slope of lag on z equals the global Moran statistic whenever W is
    row-standardized. ``standardize`` additionally scales z by its standard
    deviation for parity with common plotting tools (the slope is unchanged).
    """
    if not W.row_standardized:
        raise NotRowStandardized()
    x = _check_variable(x, W)
    z = x - x.mean()
    if standardize:
        z = z / x.std()
    lag = W.lag(z)
    slope = float(z @ lag) / float(z @ z)
    island_mask = W.w.sum(axis=1) == 0.0
    return ScatterData(
        region_ids=list(W.region_ids),
        z=z,
        lag=lag,
        quadrant=_quadrant_labels(z, lag, island_mask),
        slope=slope,
        standardized=standardize,
    )


def lisa_classify(local: MoranLocalResult, alpha: float | None = None) -> list[str]:
    """Cluster class per region: the quadrant when p_i <= alpha, otherwise
    NOT_SIGNIFICANT; islands keep the ISLAND class."""
    if alpha is None:
        alpha = local.alpha
    classes = []
    for quad, p in zip(local.quadrant, local.p_i):
        if quad == "ISLAND":
            classes.append("ISLAND")
        elif p <= alpha:
            classes.append(quad)
        else:
            classes.append("NOT_SIGNIFICANT")
    return classes
