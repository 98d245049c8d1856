"""OLS with spatial diagnostics, and ML spatial-lag / spatial-error models.

The diagnostic battery follows the classic score-test forms: Jarque-Bera on
residual moments, Breusch-Pagan (LM form) and its Koenker studentized
variant, Moran's I on residuals with Cliff-Ord moments, and the four
Lagrange multiplier tests for spatial dependence (lag/error, plain/robust)
of Anselin et al. (1996). The spatial ML estimators maximize the
concentrated log-likelihood over the scalar spatial parameter, with the
log-Jacobian evaluated through a one-time eigendecomposition of W.

Variance conventions: the ML variance (SSR/n) enters likelihoods and all LM
statistics; the unbiased variance (SSR/(n-k)) backs the OLS t-tests.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.optimize import minimize_scalar

from .errors import (
    DimensionMismatch,
    NonConvergence,
    NotRowStandardized,
    RankDeficient,
    TooFewObservations,
)
from .rng import substream
from .weights import SpatialWeights

_BOUND_MARGIN = 1e-6
_XTOL = 1e-8


@dataclass
class StatResult:
    statistic: float
    df: int
    p_value: float

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "df": self.df, "p_value": self.p_value}


@dataclass
class MoranResidualResult:
    I: float
    expected: float
    variance: float
    z: float
    p_value: float
    p_perm: float | None = None

    def to_dict(self) -> dict:
        return {
            "I": self.I,
            "expected": self.expected,
            "variance": self.variance,
            "z": self.z,
            "p_value": self.p_value,
            "p_perm": self.p_perm,
        }


@dataclass
class OlsFit:
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray
    sigma2: float
    sigma2_ml: float
    r2: float
    r2_adjusted: float
    n: int
    k: int
    column_names: list[str] | None = None


@dataclass
class DiagnosticsReport:
    jb: StatResult
    bp: StatResult
    kb: StatResult
    moran_residual: MoranResidualResult
    lm_lag: StatResult
    lm_lag_robust: StatResult
    lm_error: StatResult
    lm_error_robust: StatResult

    def to_dict(self) -> dict:
        return {
            "jb": self.jb.to_dict(),
            "bp": self.bp.to_dict(),
            "kb": self.kb.to_dict(),
            "moran_residual": self.moran_residual.to_dict(),
            "lm_lag": self.lm_lag.to_dict(),
            "lm_lag_robust": self.lm_lag_robust.to_dict(),
            "lm_error": self.lm_error.to_dict(),
            "lm_error_robust": self.lm_error_robust.to_dict(),
        }


@dataclass
class SpatialMlFit:
    model: str  # "LAG" or "ERROR"
    spatial_coefficient: float
    spatial_std_error: float
    spatial_z: float
    spatial_p: float
    coefficients: np.ndarray
    std_errors: np.ndarray
    z_stats: np.ndarray
    p_values: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray
    sigma2: float
    log_likelihood: float
    bp_residual: StatResult
    pseudo_r2: float
    n: int
    k: int
    innovations: np.ndarray | None = None
    column_names: list[str] | None = None


def _check_design(y: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch(2, X.ndim, "design matrix ndim")
    n, k = X.shape
    if len(y) != n:
        raise DimensionMismatch(n, len(y), "y length")
    if n <= k:
        raise TooFewObservations(n, k)
    rank = np.linalg.matrix_rank(X)
    if rank < k:
        raise RankDeficient(rank, k)
    return y, X


def ols(y: np.ndarray, X_design: np.ndarray, column_names: list[str] | None = None) -> OlsFit:
    """Ordinary least squares with classical (homoskedastic) inference."""
    y, X = _check_design(y, X_design)
    n, k = X.shape
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    fitted = X @ coef
    resid = y - fitted
    ssr = float(resid @ resid)
    sigma2 = ssr / (n - k)
    sigma2_ml = ssr / n
    xtx_inv = np.linalg.inv(X.T @ X)
    std_errors = np.sqrt(sigma2 * np.diag(xtx_inv))
    t_stats = coef / std_errors
    p_values = 2.0 * stats.t.sf(np.abs(t_stats), df=n - k)
    tss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ssr / tss if tss > 0 else 1.0
    r2_adjusted = 1.0 - (1.0 - r2) * (n - 1) / (n - k)
    return OlsFit(
        coefficients=coef,
        std_errors=std_errors,
        t_stats=t_stats,
        p_values=p_values,
        residuals=resid,
        fitted=fitted,
        sigma2=sigma2,
        sigma2_ml=sigma2_ml,
        r2=r2,
        r2_adjusted=r2_adjusted,
        n=n,
        k=k,
        column_names=column_names,
    )


# -- individual diagnostic statistics -----------------------------------------

def jarque_bera(residuals: np.ndarray) -> StatResult:
    """JB = (n/6) * (skew^2 + (kurt-3)^2 / 4), chi-square with 2 df."""
    e = np.asarray(residuals, dtype=float).ravel()
    n = len(e)
    d = e - e.mean()
    m2 = float((d**2).mean())
    m3 = float((d**3).mean())
    m4 = float((d**4).mean())
    skew = m3 / m2**1.5
    kurt = m4 / m2**2
    stat = (n / 6.0) * (skew**2 + (kurt - 3.0) ** 2 / 4.0)
    return StatResult(stat, 2, float(stats.chi2.sf(stat, 2)))


def _aux_regression(target: np.ndarray, X: np.ndarray) -> tuple[float, float]:
    """ESS and TSS of regressing ``target`` on X."""
    coef, *_ = np.linalg.lstsq(X, target, rcond=None)
    fitted = X @ coef
    ess = float(((fitted - target.mean()) ** 2).sum())
    tss = float(((target - target.mean()) ** 2).sum())
    return ess, tss


def breusch_pagan(residuals: np.ndarray, X_design: np.ndarray) -> StatResult:
    """LM-form Breusch-Pagan: half the explained sum of squares from
    regressing e^2 / (SSR/n) on the design, chi-square with k-1 df."""
    e = np.asarray(residuals, dtype=float).ravel()
    X = np.asarray(X_design, dtype=float)
    df = X.shape[1] - 1
    if df < 1:
        return StatResult(0.0, 0, 1.0)
    sigma2_ml = float((e**2).mean())
    g = e**2 / sigma2_ml
    ess, _ = _aux_regression(g, X)
    stat = ess / 2.0
    return StatResult(stat, df, float(stats.chi2.sf(stat, df)))


def koenker_bassett(residuals: np.ndarray, X_design: np.ndarray) -> StatResult:
    """Koenker's studentized Breusch-Pagan: n * R^2 from regressing e^2 on
    the design, replacing the 2*sigma^4 normality scaling by the empirical
    fourth moment. Chi-square with k-1 df."""
    e = np.asarray(residuals, dtype=float).ravel()
    X = np.asarray(X_design, dtype=float)
    n = len(e)
    df = X.shape[1] - 1
    if df < 1:
        return StatResult(0.0, 0, 1.0)
    ess, tss = _aux_regression(e**2, X)
    stat = n * ess / tss if tss > 0 else 0.0
    return StatResult(stat, df, float(stats.chi2.sf(stat, df)))


def residual_moran(
    residuals: np.ndarray,
    X_design: np.ndarray,
    W: SpatialWeights,
    permutations: int = 0,
    seed: int | None = None,
) -> MoranResidualResult:
    """Moran's I on regression residuals with Cliff-Ord expectation and
    variance (two-sided normal p). An optional permutation p-value shuffles
    the residual vector; it treats residuals as exchangeable, which is
    approximate, hence the moment-based p is primary."""
    e = np.asarray(residuals, dtype=float).ravel()
    X = np.asarray(X_design, dtype=float)
    n, k = X.shape
    s0 = W.s0
    ete = float(e @ e)
    I = (n / s0) * float(e @ W.lag(e)) / ete

    G = np.linalg.inv(X.T @ X)
    trA = float(np.trace(G @ (X.T @ W.w @ X)))
    expected = -(n * trA) / (s0 * (n - k))

    U = (W.w + W.w.T) / 2.0
    A = G @ (X.T @ U @ X)
    B = G @ (X.T @ U.T @ U @ X)
    s1 = 0.5 * float(((W.w + W.w.T) ** 2).sum())
    trA2 = float(np.trace(A @ A))
    trB4 = 4.0 * float(np.trace(B))
    variance = (n**2 / (s0**2 * (n - k) * (n - k + 2.0))) * (
        s1 + 2.0 * trA2 - trB4 - (2.0 * trA**2) / (n - k)
    )

    z = (I - expected) / np.sqrt(variance)
    p_value = float(2.0 * stats.norm.sf(abs(z)))

    p_perm = None
    if permutations > 0:
        if seed is None:
            raise ValueError("seed is required when permutations > 0")
        E = np.empty((permutations, n))
        for kk in range(permutations):
            rng = substream(seed, "moran-residual", kk)
            E[kk] = e[rng.permutation(n)]
        sims = (n / s0) * (E * (E @ W.w.T)).sum(axis=1) / ete
        extreme = np.abs(sims - expected) >= abs(I - expected)
        p_perm = (int(extreme.sum()) + 1) / (permutations + 1)

    return MoranResidualResult(I, expected, variance, float(z), p_value, p_perm)


def diagnostics(
    fit: OlsFit,
    X_design: np.ndarray,
    W: SpatialWeights,
    permutations: int = 0,
    seed: int | None = None,
) -> DiagnosticsReport:
    """Full diagnostic battery on an OLS fit.

    LM statistics (chi-square 1 df each), with e the residuals, y the
    dependent variable, sig2 = SSR/n, T1 = tr(W'W + WW), and
    nJ = (W X b)' M (W X b) / sig2 + T1 where M annihilates X:

      LM_error  = (e'We / sig2)^2 / T1
      LM_lag    = (e'Wy / sig2)^2 / nJ
      RLM_error = (d_e - (T1/nJ) d_y)^2 / (T1 (1 - T1/nJ))
      RLM_lag   = (d_y - d_e)^2 / (nJ - T1)

    with d_e = e'We/sig2 and d_y = e'Wy/sig2. Each robust form subtracts the
    other component's score, preserving the chi-square(1) null.
    """
    X = np.asarray(X_design, dtype=float)
    if not W.row_standardized:
        raise NotRowStandardized("diagnostics require a row-standardized W")
    if W.n != fit.n:
        raise DimensionMismatch(fit.n, W.n, "weights order")

    e = fit.residuals
    y = fit.fitted + fit.residuals
    n = fit.n
    sig2 = fit.sigma2_ml

    Wmat = W.w
    d_e = float(e @ (Wmat @ e)) / sig2
    d_y = float(e @ (Wmat @ y)) / sig2
    t1 = float(np.trace(Wmat.T @ Wmat + Wmat @ Wmat))

    wxb = Wmat @ fit.fitted
    xtwxb = X.T @ wxb
    m_wxb = float(wxb @ wxb) - float(xtwxb @ np.linalg.inv(X.T @ X) @ xtwxb)
    nj = m_wxb / sig2 + t1

    lm_error = d_e**2 / t1
    lm_lag = d_y**2 / nj
    rlm_lag = (d_y - d_e) ** 2 / (nj - t1)
    rlm_error = (d_e - (t1 / nj) * d_y) ** 2 / (t1 * (1.0 - t1 / nj))

    chi1 = lambda s: StatResult(s, 1, float(stats.chi2.sf(s, 1)))
    return DiagnosticsReport(
        jb=jarque_bera(e),
        bp=breusch_pagan(e, X),
        kb=koenker_bassett(e, X),
        moran_residual=residual_moran(e, X, W, permutations=permutations, seed=seed),
        lm_lag=chi1(lm_lag),
        lm_lag_robust=chi1(rlm_lag),
        lm_error=chi1(lm_error),
        lm_error_robust=chi1(rlm_error),
    )


# -- maximum likelihood spatial models -----------------------------------------

def spatial_eigenvalues(W: SpatialWeights) -> np.ndarray:
    """Real eigenvalue spectrum of W (real for weights derived from a
    symmetric neighbour structure by row standardization)."""
    evals = np.linalg.eigvals(W.w)
    if np.abs(evals.imag).max(initial=0.0) > 1e-8:
        warnings.warn("weights spectrum is not numerically real; using real parts")
    return np.sort(evals.real)


def log_jacobian(rho: float, evals: np.ndarray) -> float:
    """log |det(I - rho W)| from the eigenvalues of W."""
    return float(np.log(np.abs(1.0 - rho * evals)).sum())


def _rho_bounds(evals: np.ndarray) -> tuple[float, float]:
    low = 1.0 / evals.min() + _BOUND_MARGIN if evals.min() < 0 else -1.0 + _BOUND_MARGIN
    high = 1.0 / evals.max() - _BOUND_MARGIN if evals.max() > 0 else 1.0 - _BOUND_MARGIN
    return low, high


def lag_concentrated_loglik(rho: float, y: np.ndarray, X: np.ndarray, W: SpatialWeights) -> float:
    """Concentrated log-likelihood of the spatial-lag model at ``rho``
    (up to the constant -(n/2)(ln 2*pi + 1))."""
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    n = len(y)
    filtered = y - rho * W.lag(y)
    coef, *_ = np.linalg.lstsq(X, filtered, rcond=None)
    resid = filtered - X @ coef
    sig2 = float(resid @ resid) / n
    return -(n / 2.0) * np.log(sig2) + log_jacobian(rho, spatial_eigenvalues(W))


def error_concentrated_loglik(lam: float, y: np.ndarray, X: np.ndarray, W: SpatialWeights) -> float:
    """Concentrated log-likelihood of the spatial-error model at ``lam``."""
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    n = len(y)
    ys = y - lam * W.lag(y)
    Xs = X - lam * (W.w @ X)
    coef, *_ = np.linalg.lstsq(Xs, ys, rcond=None)
    resid = ys - Xs @ coef
    sig2 = float(resid @ resid) / n
    return -(n / 2.0) * np.log(sig2) + log_jacobian(lam, spatial_eigenvalues(W))


def _ols_as_spatial_fit(y, X, model, column_names) -> SpatialMlFit:
    """Degenerate case W = 0: both spatial models collapse to OLS."""
    base = ols(y, X, column_names=column_names)
    n = base.n
    loglik = -(n / 2.0) * (np.log(2.0 * np.pi) + 1.0) - (n / 2.0) * np.log(base.sigma2_ml)
    corr = np.corrcoef(base.fitted, y)[0, 1] if np.std(base.fitted) > 0 else 0.0
    return SpatialMlFit(
        model=model,
        spatial_coefficient=0.0,
        spatial_std_error=float("nan"),
        spatial_z=float("nan"),
        spatial_p=float("nan"),
        coefficients=base.coefficients,
        std_errors=base.std_errors,
        z_stats=base.t_stats,
        p_values=base.p_values,
        residuals=base.residuals,
        fitted=base.fitted,
        sigma2=base.sigma2_ml,
        log_likelihood=float(loglik),
        bp_residual=breusch_pagan(base.residuals, X),
        pseudo_r2=float(corr**2),
        n=n,
        k=base.k,
        innovations=base.residuals if model == "ERROR" else None,
        column_names=column_names,
    )


def _optimize_spatial(neg_loglik, bounds) -> float:
    res = minimize_scalar(
        neg_loglik, bounds=bounds, method="bounded", options={"xatol": _XTOL}
    )
    if not res.success:
        raise NonConvergence(getattr(res, "message", "minimize_scalar failed"))
    return float(res.x)


def ml_spatial_lag(
    y: np.ndarray,
    X_design: np.ndarray,
    W: SpatialWeights,
    column_names: list[str] | None = None,
) -> SpatialMlFit:
    """ML spatial-lag model y = rho W y + X b + e.

    Concentrates the likelihood over rho (bounded Brent search on the
    eigenvalue-feasible interval, tolerance 1e-8) and recovers b, inference
    from the analytical information matrix.
    """
    y, X = _check_design(y, X_design)
    if not W.row_standardized:
        raise NotRowStandardized("ML estimation requires a row-standardized W")
    if W.n != len(y):
        raise DimensionMismatch(len(y), W.n, "weights order")
    if W.s0 == 0.0:
        return _ols_as_spatial_fit(y, X, "LAG", column_names)

    n, k = X.shape
    ylag = W.lag(y)
    b0, *_ = np.linalg.lstsq(X, y, rcond=None)
    b1, *_ = np.linalg.lstsq(X, ylag, rcond=None)
    e0 = y - X @ b0
    e1 = ylag - X @ b1
    evals = spatial_eigenvalues(W)

    def neg_loglik(rho):
        resid = e0 - rho * e1
        sig2 = float(resid @ resid) / n
        return (n / 2.0) * np.log(sig2) - log_jacobian(rho, evals)

    rho = _optimize_spatial(neg_loglik, _rho_bounds(evals))

    coef = b0 - rho * b1
    u = e0 - rho * e1
    sig2 = float(u @ u) / n
    loglik = -(n / 2.0) * (np.log(2.0 * np.pi) + 1.0) - neg_loglik(rho)

    # analytical information matrix, parameter order (b, rho, sigma2)
    A_inv = np.linalg.inv(np.eye(n) - rho * W.w)
    WA = W.w @ A_inv
    tr1 = float(np.trace(WA))
    tr2 = float(np.trace(WA @ WA))
    tr3 = float(np.trace(WA.T @ WA))
    predy_reduced = A_inv @ (X @ coef)
    wpred = W.w @ predy_reduced
    xtx = X.T @ X
    info = np.zeros((k + 2, k + 2))
    info[:k, :k] = xtx / sig2
    info[:k, k] = (X.T @ wpred) / sig2
    info[k, :k] = info[:k, k]
    info[k, k] = tr2 + tr3 + float(wpred @ wpred) / sig2
    info[k, k + 1] = tr1 / sig2
    info[k + 1, k] = tr1 / sig2
    info[k + 1, k + 1] = n / (2.0 * sig2**2)
    vm = np.linalg.inv(info)[: k + 1, : k + 1]
    se_all = np.sqrt(np.diag(vm))

    z_all = np.concatenate([coef, [rho]]) / se_all
    p_all = 2.0 * stats.norm.sf(np.abs(z_all))
    fitted = y - u
    corr = np.corrcoef(fitted, y)[0, 1] if np.std(fitted) > 0 else 0.0

    return SpatialMlFit(
        model="LAG",
        spatial_coefficient=rho,
        spatial_std_error=float(se_all[k]),
        spatial_z=float(z_all[k]),
        spatial_p=float(p_all[k]),
        coefficients=coef,
        std_errors=se_all[:k],
        z_stats=z_all[:k],
        p_values=p_all[:k],
        residuals=u,
        fitted=fitted,
        sigma2=sig2,
        log_likelihood=float(loglik),
        bp_residual=breusch_pagan(u, X),
        pseudo_r2=float(corr**2),
        n=n,
        k=k,
        column_names=column_names,
    )


def ml_spatial_error(
    y: np.ndarray,
    X_design: np.ndarray,
    W: SpatialWeights,
    column_names: list[str] | None = None,
) -> SpatialMlFit:
    """ML spatial-error model y = X b + u, u = lambda W u + xi.

    Concentrates the likelihood over lambda; at the optimum the coefficients
    are the spatially filtered least-squares solution and the innovations
    xi = (I - lambda W)(y - X b) should be spatially white.
    """
    y, X = _check_design(y, X_design)
    if not W.row_standardized:
        raise NotRowStandardized("ML estimation requires a row-standardized W")
    if W.n != len(y):
        raise DimensionMismatch(len(y), W.n, "weights order")
    if W.s0 == 0.0:
        return _ols_as_spatial_fit(y, X, "ERROR", column_names)

    n, k = X.shape
    Wy = W.lag(y)
    WX = W.w @ X
    evals = spatial_eigenvalues(W)

    def filtered_fit(lam):
        ys = y - lam * Wy
        Xs = X - lam * WX
        coef, *_ = np.linalg.lstsq(Xs, ys, rcond=None)
        return coef, ys - Xs @ coef, Xs

    def neg_loglik(lam):
        _, resid, _ = filtered_fit(lam)
        sig2 = float(resid @ resid) / n
        return (n / 2.0) * np.log(sig2) - log_jacobian(lam, evals)

    lam = _optimize_spatial(neg_loglik, _rho_bounds(evals))

    coef, xi, Xs = filtered_fit(lam)
    sig2 = float(xi @ xi) / n
    loglik = -(n / 2.0) * (np.log(2.0 * np.pi) + 1.0) - neg_loglik(lam)

    se_coef = np.sqrt(sig2 * np.diag(np.linalg.inv(Xs.T @ Xs)))

    # information block for (lambda, sigma2); beta block is orthogonal
    WB = W.w @ np.linalg.inv(np.eye(n) - lam * W.w)
    tr1 = float(np.trace(WB))
    tr2 = float(np.trace(WB @ WB))
    tr3 = float(np.trace(WB.T @ WB))
    block = np.array([[tr2 + tr3, tr1 / sig2], [tr1 / sig2, n / (2.0 * sig2**2)]])
    se_lam = float(np.sqrt(np.linalg.inv(block)[0, 0]))

    z_coef = coef / se_coef
    p_coef = 2.0 * stats.norm.sf(np.abs(z_coef))
    z_lam = lam / se_lam
    p_lam = float(2.0 * stats.norm.sf(abs(z_lam)))

    u = y - X @ coef
    fitted = X @ coef
    corr = np.corrcoef(fitted, y)[0, 1] if np.std(fitted) > 0 else 0.0

    return SpatialMlFit(
        model="ERROR",
        spatial_coefficient=lam,
        spatial_std_error=se_lam,
        spatial_z=z_lam,
        spatial_p=p_lam,
        coefficients=coef,
        std_errors=se_coef,
        z_stats=z_coef,
        p_values=p_coef,
        residuals=u,
        fitted=fitted,
        sigma2=sig2,
        log_likelihood=float(loglik),
        bp_residual=breusch_pagan(xi, X),
        pseudo_r2=float(corr**2),
        n=n,
        k=k,
        innovations=xi,
        column_names=column_names,
    )
