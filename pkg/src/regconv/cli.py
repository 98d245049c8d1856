"""Command-line front end: weights, esda, converge, sigma subcommands.

Configuration precedence is flags > INI config file ([regconv] section) >
built-in defaults. All file writes are atomic (write temp, then rename).
Exit codes: 0 success, 2 I/O error, 3 validation error, 4 degenerate
variance, 5 estimation error; stderr messages name the failing stage.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import os
import sys
import warnings
from pathlib import Path

from . import __version__
from .convergence import (
    ConvergenceReport,
    run_convergence_pipeline,
    sigma_convergence,
)
from .data_model import PanelDataset, build_cross_section, load_covariates, load_panel
from .errors import (
    DegenerateVariance,
    EstimationError,
    ValidationError,
)
from .esda import lisa_classify, moran_global, moran_local, moran_scatter
from .weights import (
    DEFAULT_CUTOFF_KM,
    connectivity_report,
    distance_band_weights,
    load_weights,
    row_standardize,
    save_weights,
)

DEFAULTS = {
    "sector": "all",
    "cutoff_km": DEFAULT_CUTOFF_KM,
    "alpha": 0.05,
    "perms": 9999,
    "seed": None,
    "out": "out",
    "format": "json,csv",
    "variable": "growth",
    "spatial": "auto",
    "rate_mode": "literal",
    "figures": True,
    "row_standardize": True,
    "inverse_distance": False,
    "joint_covariates": False,
    "sigma": False,
    "panel": None,
    "covariates": None,
    "weights": None,
    "t0": None,
    "tT": None,
    "covariate": None,
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "regconv convergence report",
    "type": "object",
    "required": ["sector", "specification", "period", "model", "diagnostics", "convergence"],
    "properties": {
        "sector": {"type": "string"},
        "specification": {"enum": ["OLS", "SPATIAL_LAG", "SPATIAL_ERROR"]},
        "spatial_mode": {"enum": ["auto", "ols", "lag", "error"]},
        "period": {
            "type": "object",
            "properties": {
                "t0": {"type": "integer"},
                "tT": {"type": "integer"},
                "years": {"type": "integer"},
            },
        },
        "alpha": {"type": "number"},
        "model": {
            "type": "object",
            "properties": {
                "type": {"enum": ["OLS", "SPATIAL_LAG", "SPATIAL_ERROR"]},
                "coefficients": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "name": {"type": "string"},
                            "estimate": {"type": "number"},
                            "std_error": {"type": "number"},
                            "stat": {"type": "number"},
                            "p_value": {"type": "number"},
                        },
                    },
                },
                "spatial_coefficient": {"type": ["object", "null"]},
                "log_likelihood": {"type": ["number", "null"]},
                "n_observations": {"type": "integer"},
            },
        },
        "diagnostics": {
            "type": "object",
            "properties": {
                name: {"type": "object"}
                for name in (
                    "jb", "bp", "kb", "moran_residual",
                    "lm_lag", "lm_lag_robust", "lm_error", "lm_error_robust",
                )
            },
        },
        "convergence": {
            "type": "object",
            "properties": {
                "coefficient": {"type": "number"},
                "rate": {"type": ["number", "null"]},
                "diverging": {"type": "boolean"},
                "rate_mode": {"enum": ["literal", "annualized"]},
            },
        },
        "strategy_trace": {"type": ["object", "null"]},
        "table": {"type": "object"},
    },
}


# -- atomic writers ------------------------------------------------------------

def _atomic_replace(tmp: Path, path: Path) -> None:
    os.replace(tmp, path)


def write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    _atomic_replace(tmp, path)


def write_json(path, obj) -> None:
    write_text(path, json.dumps(obj, indent=2) + "\n")


def write_csv(path, header: list[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    _atomic_replace(tmp, path)


def _num(v) -> str:
    return repr(float(v))


# -- configuration -------------------------------------------------------------

def _load_config(path) -> dict:
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise OSError(f"config file not found: {path}")
    if not cp.has_section("regconv"):
        raise ValidationError(f"config file {path} has no [regconv] section")
    return dict(cp.items("regconv"))


_CASTS = {
    "cutoff_km": float,
    "alpha": float,
    "perms": int,
    "seed": int,
    "t0": int,
    "tT": int,
}
_BOOLS = {"figures", "row_standardize", "inverse_distance", "joint_covariates", "sigma"}


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """Apply precedence: command-line flag > config file > default."""
    cfg = _load_config(args.config) if getattr(args, "config", None) else {}
    for key, default in DEFAULTS.items():
        if not hasattr(args, key):
            continue
        if getattr(args, key) is not None:
            continue
        if key in cfg:
            raw = cfg[key]
            if key in _BOOLS:
                value = raw.strip().lower() in ("1", "true", "yes", "on")
            elif key in _CASTS:
                value = _CASTS[key](raw)
            elif key == "covariate":
                value = [v.strip() for v in raw.split(",") if v.strip()]
            else:
                value = raw
            setattr(args, key, value)
        else:
            setattr(args, key, default)
    return args


def _formats(args) -> set[str]:
    formats = {f.strip() for f in str(args.format).split(",") if f.strip()}
    unknown = formats - {"json", "csv"}
    if unknown:
        raise ValidationError(f"unknown output format(s): {sorted(unknown)}")
    return formats


def _require(args, *names) -> None:
    for name in names:
        if getattr(args, name) is None:
            raise ValidationError(f"--{name.replace('_', '-')} is required")


def _require_seed(args) -> None:
    if args.perms and args.perms > 0 and args.seed is None:
        raise ValidationError("--seed is required whenever --perms > 0")


def _load_panel(args) -> PanelDataset:
    panel = load_panel(args.panel)
    if args.covariates:
        panel = load_covariates(panel, args.covariates)
    return panel


def _build_weights(args, panel: PanelDataset):
    if args.weights:
        W = load_weights(args.weights)
        if W.region_ids != panel.region_ids:
            raise ValidationError("weights region order does not match panel region order")
    else:
        W = distance_band_weights(
            panel.regions, cutoff_km=args.cutoff_km, inverse_distance=args.inverse_distance
        )
    if args.row_standardize and not W.row_standardized:
        W = row_standardize(W)
    return W


def _sectors(args, panel: PanelDataset) -> list[str]:
    if args.sector == "all":
        return sorted(panel.sectors)
    if args.sector not in panel.sectors:
        raise ValidationError(f"unknown sector {args.sector!r}; available: {sorted(panel.sectors)}")
    return [args.sector]


# -- subcommands ---------------------------------------------------------------

def cmd_weights(args) -> None:
    _require(args, "panel", "out")
    panel = _load_panel(args)
    W = distance_band_weights(
        panel.regions, cutoff_km=args.cutoff_km, inverse_distance=args.inverse_distance
    )
    if args.row_standardize:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            W = row_standardize(W)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_weights(W, out / "weights.csv", out / "weights.json")
    report = connectivity_report(W)
    write_json(out / "connectivity.json", report.to_dict())
    if report.islands:
        print(
            f"weights: {len(report.islands)} island(s) with no neighbors: "
            f"{', '.join(report.islands)}",
            file=sys.stderr,
        )


def _esda_variable(args, panel: PanelDataset, sector: str):
    spec = str(args.variable)
    if spec == "growth":
        _require(args, "t0", "tT")
        cs = build_cross_section(panel, sector, args.t0, args.tT)
        return cs.growth, "growth"
    if spec == "initial":
        _require(args, "t0", "tT")
        cs = build_cross_section(panel, sector, args.t0, args.tT)
        return cs.log_initial, "initial"
    if spec.startswith("level@"):
        year = int(spec.split("@", 1)[1])
        return panel.productivity(sector, year), spec
    raise ValidationError(f"unknown variable {spec!r}; use growth, initial, or level@YEAR")


def cmd_esda(args) -> None:
    _require(args, "panel", "out")
    _require_seed(args)
    panel = _load_panel(args)
    W = _build_weights(args, panel)
    if not W.row_standardized:
        raise ValidationError("esda requires row-standardized weights (drop --no-row-standardize)")
    formats = _formats(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for sector in _sectors(args, panel):
        x, varname = _esda_variable(args, panel, sector)
        glob = moran_global(x, W, permutations=args.perms, seed=args.seed)
        local = moran_local(x, W, permutations=args.perms, seed=args.seed, alpha=args.alpha)
        scatter = moran_scatter(x, W)
        classes = lisa_classify(local, args.alpha)

        stem = f"esda_{sector}"
        if "json" in formats:
            payload = glob.to_dict()
            payload.update({"sector": sector, "variable": varname, "alpha": args.alpha})
            write_json(out / f"{stem}_moran.json", payload)
        if "csv" in formats:
            write_csv(
                out / f"{stem}_scatter.csv",
                ["region_id", "z", "lag", "quadrant"],
                [
                    (rid, _num(z), _num(l), q)
                    for rid, z, l, q in zip(
                        scatter.region_ids, scatter.z, scatter.lag, scatter.quadrant
                    )
                ],
            )
            write_csv(
                out / f"{stem}_lisa.csv",
                ["region_id", "z", "lag", "quadrant", "I_i", "p_i", "class"],
                [
                    (rid, _num(z), _num(l), q, _num(ii), _num(p), cls)
                    for rid, z, l, q, ii, p, cls in zip(
                        local.region_ids, local.z, local.lag, local.quadrant,
                        local.I_i, local.p_i, classes,
                    )
                ],
            )
        if args.figures:
            from . import figures

            figures.moran_scatter_figure(
                scatter, out / f"{stem}_moran_scatter.png", label=f"{sector}, {varname}"
            )
            figures.lisa_figure(
                panel.regions, classes, out / f"{stem}_lisa.png", label=f"{sector}, {varname}"
            )


def _converge_runs(args, panel: PanelDataset) -> list[tuple[str, list[str], str]]:
    """(sector, covariate names, report stem) per estimation run. One run per
    covariate by default to avoid collinear schooling shares; --joint-covariates
    puts them all in one regression."""
    covs = args.covariate or []
    runs = []
    for sector in _sectors(args, panel):
        if not covs:
            runs.append((sector, [], f"converge_{sector}"))
        elif args.joint_covariates:
            runs.append((sector, list(covs), f"converge_{sector}"))
        else:
            for name in covs:
                runs.append((sector, [name], f"converge_{sector}_{name}"))
    return runs


def cmd_converge(args) -> None:
    _require(args, "panel", "out", "t0", "tT")
    _require_seed(args)
    panel = _load_panel(args)
    W = _build_weights(args, panel)
    formats = _formats(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    reports: list[ConvergenceReport] = []
    stems: list[str] = []
    for sector, covs, stem in _converge_runs(args, panel):
        report = run_convergence_pipeline(
            panel,
            sector,
            args.t0,
            args.tT,
            W,
            conditioning=covs,
            alpha=args.alpha,
            permutations=args.perms,
            seed=args.seed,
            spatial_mode=args.spatial,
            rate_mode=args.rate_mode,
        )
        reports.append(report)
        stems.append(stem)
        if "json" in formats:
            write_json(out / f"{stem}.json", report.to_dict())
        if args.figures:
            from . import figures

            cs = build_cross_section(panel, sector, args.t0, args.tT)
            figures.convergence_scatter_figure(
                cs,
                out / f"{stem}.png",
                sector=sector,
                slope=float(report.ols_fit.coefficients[1]),
                intercept=float(report.ols_fit.coefficients[0]),
            )

    if "csv" in formats and reports:
        rows = [r.table_row() for r in reports]
        header: list[str] = []
        for row in rows:
            for key in row:
                if key not in header:
                    header.append(key)
        write_csv(
            out / "converge.csv",
            header,
            [[row.get(key, "") for key in header] for row in rows],
        )

    if args.sigma:
        _write_sigma(args, panel, out, formats)


def _write_sigma(args, panel: PanelDataset, out: Path, formats: set[str]) -> None:
    sectors = _sectors(args, panel)
    series = [sigma_convergence(panel, sector) for sector in sectors]
    years = sorted({y for s in series for y in s.years})
    if "csv" in formats:
        rows = []
        for s in series:
            by_year = dict(zip(s.years, s.cv))
            rows.append([s.sector] + [_num(by_year[y]) if y in by_year else "" for y in years])
        write_csv(out / "sigma.csv", ["sector"] + [str(y) for y in years], rows)
    if "json" in formats:
        write_json(
            out / "sigma.json",
            {
                "years": years,
                "series": {
                    s.sector: {str(y): c for y, c in zip(s.years, s.cv.tolist())}
                    for s in series
                },
            },
        )
    if args.figures:
        from . import figures

        figures.sigma_series_figure(series, out / "sigma.png")


def cmd_sigma(args) -> None:
    _require(args, "panel", "out")
    panel = _load_panel(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_sigma(args, panel, out, _formats(args))


# -- parser --------------------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="INI config file with a [regconv] section")
    parser.add_argument("--panel", help="long-format panel CSV")
    parser.add_argument("--covariates", help="wide-format covariate CSV")
    parser.add_argument("--weights", help="prebuilt weights edge-list CSV (with JSON sidecar)")
    parser.add_argument("--sector", help="sector label or 'all'")
    parser.add_argument("--t0", type=int, help="first year")
    parser.add_argument("--tT", type=int, help="last year")
    parser.add_argument("--cutoff-km", dest="cutoff_km", type=float, help="distance band cutoff")
    parser.add_argument("--alpha", type=float, help="significance level")
    parser.add_argument("--perms", type=int, help="permutation draws")
    parser.add_argument("--seed", type=int, help="random seed (required when --perms > 0)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--format", help="comma-separated subset of json,csv")
    parser.add_argument(
        "--figures", action=argparse.BooleanOptionalAction, help="render PNG figures"
    )
    parser.add_argument(
        "--row-standardize",
        dest="row_standardize",
        action=argparse.BooleanOptionalAction,
        help="row-standardize the weights",
    )
    parser.add_argument(
        "--inverse-distance",
        dest="inverse_distance",
        action=argparse.BooleanOptionalAction,
        help="inverse-distance weights inside the band instead of binary",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regconv",
        description="Spatial-econometric toolkit for regional productivity convergence.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--schema", action="store_true", help="print the convergence report JSON schema and exit"
    )
    sub = parser.add_subparsers(dest="command")

    p_weights = sub.add_parser("weights", help="build and export the spatial weights matrix")
    _add_common(p_weights)

    p_esda = sub.add_parser("esda", help="global/local Moran statistics and LISA classes")
    _add_common(p_esda)
    p_esda.add_argument("--variable", help="growth, initial, or level@YEAR")

    p_conv = sub.add_parser("converge", help="convergence regression with specification search")
    _add_common(p_conv)
    p_conv.add_argument(
        "--covariate", action="append", help="conditioning covariate (repeatable)"
    )
    p_conv.add_argument(
        "--joint-covariates",
        dest="joint_covariates",
        action=argparse.BooleanOptionalAction,
        help="one regression with all covariates instead of one per covariate",
    )
    p_conv.add_argument("--spatial", choices=["auto", "ols", "lag", "error"], help="model choice")
    p_conv.add_argument("--rate-mode", dest="rate_mode", choices=["literal", "annualized"])
    p_conv.add_argument(
        "--sigma", action=argparse.BooleanOptionalAction, help="also write the sigma grid"
    )

    p_sigma = sub.add_parser("sigma", help="sigma-convergence grid (sector by year)")
    _add_common(p_sigma)

    return parser


def _dispatch(args) -> None:
    {"weights": cmd_weights, "esda": cmd_esda, "converge": cmd_converge, "sigma": cmd_sigma}[
        args.command
    ](args)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.schema:
        print(json.dumps(REPORT_SCHEMA, indent=2))
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("regconv: a subcommand is required", file=sys.stderr)
        return 2
    stage = args.command
    try:
        _merge_config(args)
        _dispatch(args)
    except DegenerateVariance as exc:
        print(f"{stage}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    except EstimationError as exc:
        print(f"{stage}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 5
    except (ValidationError, ValueError) as exc:
        print(f"{stage}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"{stage}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
