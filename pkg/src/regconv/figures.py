"""Figure rendering for the report path.

Renders the plot-shaped outputs (convergence scatter, Moran scatter, LISA
point classification, sigma series) to PNG files next to the delimited data
products. Uses the Agg backend; no display is ever opened.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .convergence import SigmaSeries
from .data_model import CrossSection, RegionRecord
from .esda import ScatterData

DPI = 150

LISA_COLORS = {
    "HH": "#d7191c",
    "LL": "#2c7bb6",
    "HL": "#fdae61",
    "LH": "#abd9e9",
    "NOT_SIGNIFICANT": "#bdbdbd",
    "ISLAND": "#636363",
}


def _save(fig, path):
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)


def convergence_scatter_figure(cs: CrossSection, path, sector: str = "", slope: float | None = None,
                               intercept: float | None = None) -> None:
    """Growth against log initial level, with the fitted line if given."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.scatter(cs.log_initial, cs.growth, s=28, color="#2c7bb6", edgecolor="black", linewidth=0.4)
    if slope is not None and intercept is not None:
        xs = np.linspace(cs.log_initial.min(), cs.log_initial.max(), 50)
        ax.plot(xs, intercept + slope * xs, color="#d7191c", linewidth=1.2)
    ax.set_xlabel("log initial productivity")
    ax.set_ylabel("annualized growth")
    title = "Convergence scatter"
    if sector:
        title += f" ({sector})"
    ax.set_title(title)
    ax.axhline(0, color="grey", linewidth=0.6)
    _save(fig, path)


def moran_scatter_figure(scatter: ScatterData, path, label: str = "") -> None:
    """Mean-deviation variable against its spatial lag, with the Moran slope."""
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    ax.scatter(scatter.z, scatter.lag, s=28, color="#2c7bb6", edgecolor="black", linewidth=0.4)
    lim = max(np.abs(scatter.z).max(), np.abs(scatter.lag).max()) * 1.15
    xs = np.linspace(-lim, lim, 20)
    ax.plot(xs, scatter.slope * xs, color="#d7191c", linewidth=1.2,
            label=f"slope = {scatter.slope:.3f}")
    ax.axhline(0, color="grey", linewidth=0.6)
    ax.axvline(0, color="grey", linewidth=0.6)
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim, lim)
    ax.set_xlabel("variable (deviation)")
    ax.set_ylabel("spatial lag")
    title = "Moran scatter"
    if label:
        title += f" ({label})"
    ax.set_title(title)
    ax.legend(loc="upper left", frameon=False)
    _save(fig, path)


def lisa_figure(regions: list[RegionRecord], classes: list[str], path, label: str = "") -> None:
    """Region locations colored by LISA cluster class (point display, not a
    polygon map)."""
    fig, ax = plt.subplots(figsize=(6, 6))
    xs = np.array([r.x_km for r in regions])
    ys = np.array([r.y_km for r in regions])
    for cls in ("NOT_SIGNIFICANT", "ISLAND", "HL", "LH", "LL", "HH"):
        mask = np.array([c == cls for c in classes])
        if mask.any():
            ax.scatter(xs[mask], ys[mask], s=46, color=LISA_COLORS[cls], label=cls,
                       edgecolor="black", linewidth=0.4)
    ax.set_xlabel("x (km)")
    ax.set_ylabel("y (km)")
    ax.set_aspect("equal", adjustable="datalim")
    title = "LISA clusters"
    if label:
        title += f" ({label})"
    ax.set_title(title)
    ax.legend(loc="best", frameon=False, fontsize=8)
    _save(fig, path)


def sigma_series_figure(series: list[SigmaSeries], path) -> None:
    """Coefficient of variation over time, one line per sector."""
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for s in series:
        ax.plot(s.years, s.cv, marker="o", markersize=3.5, linewidth=1.1, label=s.sector)
    ax.set_xlabel("year")
    ax.set_ylabel("coefficient of variation")
    ax.set_title("Sigma convergence")
    ax.legend(frameon=False, fontsize=8)
    _save(fig, path)
