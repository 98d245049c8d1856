"""Independent reference implementations used to cross-check the library.

Everything here is written from the textbook formulas with plain loops and
explicit matrices, on purpose: these functions must not share code paths
with the package under test.
"""

import numpy as np
from scipy import stats


def moran_global_bruteforce(x, w):
    """Double-loop global Moran statistic."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    u = x.mean()
    s = 0.0
    num = 0.0
    for i in range(n):
        for j in range(n):
            s += w[i, j]
            num += w[i, j] * (x[i] - u) * (x[j] - u)
    den = sum((xi - u) ** 2 for xi in x)
    return (n / s) * num / den


def moran_local_bruteforce(x, w):
    """Double-loop local Moran vector (deviation form)."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    u = x.mean()
    m2 = sum((xi - u) ** 2 for xi in x)
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += w[i, j] * (x[j] - u)
        out[i] = (x[i] - u) * acc / m2
    return out


def spatial_lag_bruteforce(w, x):
    n = len(x)
    out = np.zeros(n)
    for i in range(n):
        for j in range(n):
            out[i] += w[i, j] * x[j]
    return out


def components_unionfind(adjacency):
    """Connected components of a symmetric boolean adjacency matrix."""
    n = adjacency.shape[0]
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for i in range(n):
        for j in range(n):
            if adjacency[i, j] or adjacency[j, i]:
                union(i, j)
    return len({find(i) for i in range(n)})


def ols_normal_equations(y, X):
    """Coefficients via the normal equations (X'X)^-1 X'y."""
    return np.linalg.inv(X.T @ X) @ (X.T @ y)


def jarque_bera_oracle(e):
    n = len(e)
    skew = stats.skew(e)
    kurt = stats.kurtosis(e, fisher=False)
    return (n / 6.0) * (skew**2 + 0.25 * (kurt - 3.0) ** 2)


def breusch_pagan_oracle(e, X):
    """ESS/2 of the regression of e^2/(SSR/n) on X."""
    n = len(e)
    sig2 = (e @ e) / n
    g = e**2 / sig2
    beta = np.linalg.solve(X.T @ X, X.T @ g)
    ghat = X @ beta
    return float(((ghat - g.mean()) ** 2).sum()) / 2.0


def koenker_bassett_oracle(e, X):
    """n R^2 of the regression of e^2 on X."""
    n = len(e)
    target = e**2
    beta = np.linalg.solve(X.T @ X, X.T @ target)
    fitted = X @ beta
    ess = float(((fitted - target.mean()) ** 2).sum())
    tss = float(((target - target.mean()) ** 2).sum())
    return n * ess / tss


def lm_tests_oracle(y, X, w):
    """(lm_lag, rlm_lag, lm_error, rlm_error) from the published score
    formulas, with explicit annihilator and double-loop traces."""
    n, k = X.shape
    xtx_inv = np.linalg.inv(X.T @ X)
    H = X @ xtx_inv @ X.T
    M = np.eye(n) - H
    b = xtx_inv @ (X.T @ y)
    e = y - X @ b
    sig2 = (e @ e) / n

    t1 = 0.0
    for i in range(n):
        for j in range(n):
            t1 += w[i, j] * w[i, j] + w[i, j] * w[j, i]

    d_e = (e @ (w @ e)) / sig2
    d_y = (e @ (w @ y)) / sig2
    wxb = w @ (X @ b)
    nj = (wxb @ (M @ wxb)) / sig2 + t1

    lm_error = d_e**2 / t1
    lm_lag = d_y**2 / nj
    rlm_lag = (d_y - d_e) ** 2 / (nj - t1)
    rlm_error = (d_e - (t1 / nj) * d_y) ** 2 / (t1 * (1.0 - t1 / nj))
    return lm_lag, rlm_lag, lm_error, rlm_error


def residual_moran_bruteforce(e, w):
    n = len(e)
    s = w.sum()
    num = 0.0
    for i in range(n):
        for j in range(n):
            num += w[i, j] * e[i] * e[j]
    return (n / s) * num / (e @ e)


def logdet_direct(rho, A):
    """log |det(I - rho A)| via the dense determinant."""
    n = A.shape[0]
    return float(np.log(abs(np.linalg.det(np.eye(n) - rho * A))))
