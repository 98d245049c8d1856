"""Convergence analysis: sigma series, model assembly, specification search.

The cross-section growth regression (annualized log growth on log initial
level, optionally conditioned on covariates) is estimated by OLS first; the
robust LM tests then drive the classic specification-search strategy of
Florax, Folmer and Rey (2003), re-estimating by ML with a spatial lag or
spatial error term when the tests call for it. The slope on the initial
level maps to an annual convergence rate through b = 1 - exp(-rate*T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data_model import CrossSection, PanelDataset, attach_covariates, build_cross_section
from .econometrics import (
    DiagnosticsReport,
    OlsFit,
    SpatialMlFit,
    diagnostics,
    ml_spatial_error,
    ml_spatial_lag,
    ols,
)
from .errors import (
    InvalidCoefficient,
    MissingCovariates,
    TooFewRegions,
    UnknownSector,
    ValidationError,
)
from .weights import SpatialWeights

SPECIFICATIONS = ("OLS", "SPATIAL_LAG", "SPATIAL_ERROR")


@dataclass
class SigmaSeries:
    """Coefficient of variation of productivity across regions, per year."""

    sector: str
    years: list[int]
    cv: np.ndarray

    def to_rows(self) -> list[tuple[int, float]]:
        return list(zip(self.years, self.cv.tolist()))


@dataclass
class StrategyStep:
    rule: int
    test: str
    statistic: float | None
    p_value: float | None
    decision: str

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "test": self.test,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "decision": self.decision,
        }


@dataclass
class StrategyTrace:
    steps: list[StrategyStep]
    terminal_rule: int
    specification: str

    def to_dict(self) -> dict:
        return {
            "steps": [s.to_dict() for s in self.steps],
            "terminal_rule": self.terminal_rule,
            "specification": self.specification,
        }


@dataclass
class ModelSpec:
    conditioning: str  # "none" or "covariates"
    spatial: str  # "none", "lag", "error"
    column_names: list[str] = field(default_factory=list)


def sigma_convergence(panel: PanelDataset, sector: str) -> SigmaSeries:
    """Year-by-year coefficient of variation (population std / mean)."""
    if sector not in panel.sectors:
        raise UnknownSector(sector, panel.sectors)
    if panel.n < 2:
        raise TooFewRegions(panel.n, 2)
    years = panel.years(sector)
    cv = np.empty(len(years))
    for i, year in enumerate(years):
        values = panel.productivity(sector, year)
        cv[i] = values.std() / values.mean()
    return SigmaSeries(sector=sector, years=years, cv=cv)


def convergence_rate(b: float, T: float) -> float:
    """Annual rate implied by the convergence magnitude b over T years:
    rate = -ln(1 - b) / T. Requires b < 1."""
    if T <= 0:
        raise ValidationError(f"period length must be positive, got T={T}")
    if b >= 1:
        raise InvalidCoefficient(b)
    return -math.log(1.0 - b) / T


def assemble_model(
    cs: CrossSection,
    conditioning: str = "none",
    spatial: str = "none",
) -> tuple[np.ndarray, np.ndarray, ModelSpec]:
    """Build (y, X_design, spec): y is the growth vector, the design holds an
    intercept, the log initial level, and any attached covariates."""
    if conditioning not in ("none", "covariates"):
        raise ValidationError(f"conditioning must be 'none' or 'covariates', got {conditioning!r}")
    if spatial not in ("none", "lag", "error"):
        raise ValidationError(f"spatial must be 'none', 'lag' or 'error', got {spatial!r}")

    columns = [np.ones(cs.n), cs.log_initial]
    names = ["const", "log_initial"]
    if conditioning == "covariates":
        if cs.covariates is None:
            raise MissingCovariates()
        for j, name in enumerate(cs.covariate_names):
            columns.append(cs.covariates[:, j])
            names.append(name)
    X = np.column_stack(columns)
    return cs.growth.copy(), X, ModelSpec(conditioning, spatial, names)


def fit_model(
    y: np.ndarray,
    X: np.ndarray,
    spec: ModelSpec,
    W: SpatialWeights | None = None,
):
    """Dispatch the assembled model to the matching estimator."""
    if spec.spatial == "none":
        return ols(y, X, column_names=spec.column_names)
    if W is None:
        raise ValidationError(f"spatial '{spec.spatial}' specification requires weights")
    if spec.spatial == "lag":
        return ml_spatial_lag(y, X, W, column_names=spec.column_names)
    return ml_spatial_error(y, X, W, column_names=spec.column_names)


def florax_select(
    ols_fit: OlsFit,
    report: DiagnosticsReport,
    alpha: float = 0.05,
) -> tuple[str, StrategyTrace]:
    """Classic specification search on the robust LM tests.

    Significance at level alpha (p <= alpha). Neither robust test firing
    keeps OLS (rule 3); both firing picks the component with the smaller
    robust p-value (rule 4); exactly one firing picks that component
    (rules 5 and 6).
    """
    p_lag = report.lm_lag_robust.p_value
    p_err = report.lm_error_robust.p_value
    lag_sig = p_lag <= alpha
    err_sig = p_err <= alpha

    steps = [
        StrategyStep(1, "ols", None, None, "baseline estimated by OLS"),
        StrategyStep(
            2, "lm_lag_robust", report.lm_lag_robust.statistic, p_lag,
            "significant" if lag_sig else "not significant",
        ),
        StrategyStep(
            2, "lm_error_robust", report.lm_error_robust.statistic, p_err,
            "significant" if err_sig else "not significant",
        ),
    ]

    if not lag_sig and not err_sig:
        rule, spec = 3, "OLS"
        steps.append(StrategyStep(3, "decision", None, None, "neither robust test significant: keep OLS"))
    elif lag_sig and err_sig:
        rule = 4
        spec = "SPATIAL_LAG" if p_lag <= p_err else "SPATIAL_ERROR"
        steps.append(StrategyStep(4, "decision", None, None,
                                  f"both significant: smaller robust p-value wins ({spec})"))
    elif lag_sig:
        rule, spec = 5, "SPATIAL_LAG"
        steps.append(StrategyStep(5, "decision", None, None, "only robust LM lag significant"))
    else:
        rule, spec = 6, "SPATIAL_ERROR"
        steps.append(StrategyStep(6, "decision", None, None, "only robust LM error significant"))

    return spec, StrategyTrace(steps=steps, terminal_rule=rule, specification=spec)


_STAR_5 = 0.05
_STAR_10 = 0.10


def _stars(p: float | None) -> str:
    if p is None or not np.isfinite(p):
        return ""
    if p <= _STAR_5:
        return "*"
    if p <= _STAR_10:
        return "**"
    return ""


def _fmt_coef(estimate: float, stat: float, p: float) -> str:
    return f"{estimate:.4f}{_stars(p)} ({stat:.3f})"


def _fmt_stat(statistic: float, p: float) -> str:
    return f"{statistic:.3f}{_stars(p)}"


@dataclass
class ConvergenceReport:
    sector: str
    specification: str
    spatial_mode: str
    trace: StrategyTrace | None
    ols_fit: OlsFit
    diagnostics: DiagnosticsReport
    ml_fit: SpatialMlFit | None
    coefficient: float
    rate: float | None
    diverging: bool
    rate_mode: str
    t0: int
    tT: int
    alpha: float
    column_names: list[str]

    @property
    def final_fit(self):
        return self.ml_fit if self.ml_fit is not None else self.ols_fit

    def to_dict(self) -> dict:
        fit = self.final_fit
        coef_table = []
        for i, name in enumerate(self.column_names):
            stat = fit.t_stats[i] if isinstance(fit, OlsFit) else fit.z_stats[i]
            coef_table.append(
                {
                    "name": name,
                    "estimate": float(fit.coefficients[i]),
                    "std_error": float(fit.std_errors[i]),
                    "stat": float(stat),
                    "p_value": float(fit.p_values[i]),
                }
            )
        model: dict = {
            "type": self.specification,
            "coefficients": coef_table,
            "spatial_coefficient": None,
            "log_likelihood": None,
            "n_observations": fit.n,
        }
        if isinstance(fit, SpatialMlFit):
            model["spatial_coefficient"] = {
                "name": "rho" if fit.model == "LAG" else "lambda",
                "estimate": fit.spatial_coefficient,
                "std_error": fit.spatial_std_error,
                "stat": fit.spatial_z,
                "p_value": fit.spatial_p,
            }
            model["log_likelihood"] = fit.log_likelihood
            model["pseudo_r2"] = fit.pseudo_r2
            model["bp_residual"] = fit.bp_residual.to_dict()
        else:
            model["r2_adjusted"] = fit.r2_adjusted
        return {
            "sector": self.sector,
            "specification": self.specification,
            "spatial_mode": self.spatial_mode,
            "period": {"t0": self.t0, "tT": self.tT, "years": self.tT - self.t0},
            "alpha": self.alpha,
            "model": model,
            "diagnostics": self.diagnostics.to_dict(),
            "convergence": {
                "coefficient": self.coefficient,
                "rate": self.rate,
                "diverging": self.diverging,
                "rate_mode": self.rate_mode,
            },
            "strategy_trace": self.trace.to_dict() if self.trace else None,
            "table": self.table_row(),
        }

    def table_row(self) -> dict:
        """Flat row matching the published-table layout: constant,
        convergence coefficient, covariates, spatial coefficient when
        present, diagnostic battery, adjusted R-squared, N.O."""
        fit = self.final_fit
        stats_vec = fit.t_stats if isinstance(fit, OlsFit) else fit.z_stats
        d = self.diagnostics
        row = {
            "Sector": self.sector,
            "Specification": self.specification,
            "Con.": _fmt_coef(fit.coefficients[0], stats_vec[0], fit.p_values[0]),
            "Coef. b": _fmt_coef(fit.coefficients[1], stats_vec[1], fit.p_values[1]),
        }
        for i, name in enumerate(self.column_names[2:], start=2):
            row[f"Coef. {name}"] = _fmt_coef(fit.coefficients[i], stats_vec[i], fit.p_values[i])
        if isinstance(fit, SpatialMlFit):
            row["Spatial coef."] = _fmt_coef(
                fit.spatial_coefficient, fit.spatial_z, fit.spatial_p
            )
        else:
            row["Spatial coef."] = ""
        row.update(
            {
                "JB": _fmt_stat(d.jb.statistic, d.jb.p_value),
                "BP": _fmt_stat(d.bp.statistic, d.bp.p_value),
                "KB": _fmt_stat(d.kb.statistic, d.kb.p_value),
                "M'I": _fmt_stat(d.moran_residual.I, d.moran_residual.p_value),
                "LM_i": _fmt_stat(d.lm_lag.statistic, d.lm_lag.p_value),
                "LMR_i": _fmt_stat(d.lm_lag_robust.statistic, d.lm_lag_robust.p_value),
                "LM_e": _fmt_stat(d.lm_error.statistic, d.lm_error.p_value),
                "LMR_e": _fmt_stat(d.lm_error_robust.statistic, d.lm_error_robust.p_value),
                "adj_R2": (
                    f"{fit.r2_adjusted:.4f}"
                    if isinstance(fit, OlsFit)
                    else f"{fit.pseudo_r2:.4f}"
                ),
                "N.O.": fit.n,
            }
        )
        return row


def _rate_from_slope(slope: float, T: int, rate_mode: str) -> tuple[float | None, bool]:
    """Map the estimated slope to (annual rate, diverging flag).

    'literal' treats the slope magnitude as the convergence coefficient b;
    'annualized' treats the slope as b/T (the dependent variable is already
    divided by T). A nonnegative slope means divergence: no rate."""
    if slope >= 0:
        return None, True
    if rate_mode == "literal":
        return convergence_rate(-slope, T), False
    if rate_mode == "annualized":
        b = -T * slope
        if b >= 1:
            return None, False
        return convergence_rate(b, T), False
    raise ValidationError(f"rate_mode must be 'literal' or 'annualized', got {rate_mode!r}")


def run_convergence_pipeline(
    panel: PanelDataset,
    sector: str,
    t0: int,
    tT: int,
    W: SpatialWeights,
    conditioning: list[str] | tuple[str, ...] = (),
    alpha: float = 0.05,
    permutations: int = 999,
    seed: int | None = None,
    spatial_mode: str = "auto",
    rate_mode: str = "literal",
) -> ConvergenceReport:
    """End-to-end convergence analysis for one sector.

    Builds the cross-section, estimates OLS with the full diagnostic
    battery, applies the specification strategy (or the forced
    ``spatial_mode``), re-estimates by ML when a spatial component is
    selected, and derives the convergence rate.
    """
    if spatial_mode not in ("auto", "ols", "lag", "error"):
        raise ValidationError(f"spatial_mode must be auto/ols/lag/error, got {spatial_mode!r}")

    cs = build_cross_section(panel, sector, t0, tT)
    if conditioning:
        cs = attach_covariates(cs, panel, list(conditioning))
    y, X, spec = assemble_model(cs, "covariates" if conditioning else "none")

    ols_fit = ols(y, X, column_names=spec.column_names)
    report = diagnostics(ols_fit, X, W, permutations=permutations, seed=seed)

    trace = None
    if spatial_mode == "auto":
        specification, trace = florax_select(ols_fit, report, alpha)
    else:
        specification = {"ols": "OLS", "lag": "SPATIAL_LAG", "error": "SPATIAL_ERROR"}[spatial_mode]

    ml_fit = None
    if specification == "SPATIAL_LAG":
        ml_fit = ml_spatial_lag(y, X, W, column_names=spec.column_names)
    elif specification == "SPATIAL_ERROR":
        ml_fit = ml_spatial_error(y, X, W, column_names=spec.column_names)

    fit = ml_fit if ml_fit is not None else ols_fit
    slope = float(fit.coefficients[1])
    rate, diverging = _rate_from_slope(slope, cs.T, rate_mode)

    return ConvergenceReport(
        sector=sector,
        specification=specification,
        spatial_mode=spatial_mode,
        trace=trace,
        ols_fit=ols_fit,
        diagnostics=report,
        ml_fit=ml_fit,
        coefficient=slope,
        rate=rate,
        diverging=diverging,
        rate_mode=rate_mode,
        t0=t0,
        tT=tT,
        alpha=alpha,
        column_names=spec.column_names,
    )
