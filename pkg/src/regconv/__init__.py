"""regconv: spatial-econometric toolkit for regional productivity convergence.

Covers the full cross-section workflow: distance-band spatial weights,
exploratory spatial data analysis (global/local Moran, LISA classes),
convergence regressions with a spatial diagnostic battery, ML spatial-lag
and spatial-error estimation, sigma-convergence series, and an automated
specification search, all behind a reproducible seeded CLI.
"""

__version__ = "0.1.0"

from .convergence import (
    ConvergenceReport,
    SigmaSeries,
    StrategyTrace,
    assemble_model,
    convergence_rate,
    florax_select,
    run_convergence_pipeline,
    sigma_convergence,
)
from .data_model import (
    CrossSection,
    PanelDataset,
    RegionRecord,
    attach_covariates,
    build_cross_section,
    load_covariates,
    load_panel,
)
from .econometrics import (
    DiagnosticsReport,
    OlsFit,
    SpatialMlFit,
    diagnostics,
    ml_spatial_error,
    ml_spatial_lag,
    ols,
)
from .esda import (
    MoranGlobalResult,
    MoranLocalResult,
    ScatterData,
    lisa_classify,
    moran_global,
    moran_local,
    moran_scatter,
)
from .weights import (
    DEFAULT_CUTOFF_KM,
    SpatialWeights,
    connectivity_report,
    distance_band_weights,
    load_weights,
    row_standardize,
    save_weights,
    spatial_lag_vector,
)

__all__ = [
    "__version__",
    "ConvergenceReport",
    "CrossSection",
    "DEFAULT_CUTOFF_KM",
    "DiagnosticsReport",
    "MoranGlobalResult",
    "MoranLocalResult",
    "OlsFit",
    "PanelDataset",
    "RegionRecord",
    "ScatterData",
    "SigmaSeries",
    "SpatialMlFit",
    "SpatialWeights",
    "StrategyTrace",
    "assemble_model",
    "attach_covariates",
    "build_cross_section",
    "connectivity_report",
    "convergence_rate",
    "diagnostics",
    "distance_band_weights",
    "florax_select",
    "lisa_classify",
    "load_covariates",
    "load_panel",
    "load_weights",
    "ml_spatial_error",
    "ml_spatial_lag",
    "moran_global",
    "moran_local",
    "moran_scatter",
    "ols",
    "row_standardize",
    "run_convergence_pipeline",
    "save_weights",
    "sigma_convergence",
    "spatial_lag_vector",
]
