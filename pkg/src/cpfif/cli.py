"""Command-line front end.

Exit codes: 0 success, 2 configuration or validation error, 3 numerically
inadmissible request (scaling factors, knot mismatch, resource cap),
4 input/output failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .core import DataSet, Grid, InadmissibleScalingError, ResourceLimitError
from .curvature import CurvatureProfile, curvature_deviation, curvature_of, discrete_curvature
from .fif import InterpolationError, build_cp_cfif, eval_fif, eval_fif_grid, refine_attractor
from .fileio import (
    CURVE_HEADER,
    line_plot_svg,
    read_dataset,
    write_columns,
    write_json,
    write_markdown_table,
)
from .optimize import PenaltyConfig, minimize_penalty, spline_curvature, theorem4_bounds
from .splines import SCHEMES, eval_spline

log = logging.getLogger("cpfif")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

DEFAULTS = {
    "data": None,
    "dataset": None,
    "seed": 42,
    "noise_n": 9,
    "sigma": 0.1,
    "lam": "reference",
    "scheme": "natural_spline",
    "base": "hermite5",
    "grid": None,
    "tol": 1e-12,
    "eps": analysis.REFERENCE_EPSILON,
    "out": "cpfif-out",
    "formats": "csv,json,svg",
    "lam_min": 0.0,
    "sweeps": 200,
    "opt_tol": 1e-6,
    "init": None,
    "x": None,
    "points": None,
    "depth": None,
    "repetitions": 15,
    "counts": "10,20,50,100,200,500",
}


class ConfigError(ValueError):
    pass


def _add_common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    src = p.add_mutually_exclusive_group()
    src.add_argument("--data", default=S, help="input CSV with header x,y")
    src.add_argument("--dataset", default=S, choices=analysis.DATASETS, help="canonical dataset id")
    p.add_argument("--seed", type=int, default=S, help="noisy_sine seed (default 42)")
    p.add_argument("--noise-n", dest="noise_n", type=int, default=S, help="noisy_sine point count (default 9)")
    p.add_argument("--sigma", type=float, default=S, help="noisy_sine noise level (default 0.1)")
    p.add_argument("--lambda", dest="lam", default=S,
                   help="scaling factors: 'reference' (published vector), a scalar, a comma list, 'optimize' or 'theorem4:EPS'")
    p.add_argument("--scheme", choices=SCHEMES, default=S, help="knot-derivative scheme for S")
    p.add_argument("--base", choices=("hermite5", "hermite3", "chord"), default=S)
    p.add_argument("--grid", type=int, default=S, help="evaluation grid size")
    p.add_argument("--tol", type=float, default=S, help="fixed-point tolerance")
    p.add_argument("--eps", type=float, default=S, help="curvature tolerance for reported bounds")
    p.add_argument("--out", default=S, help="output directory")
    p.add_argument("--formats", default=S, help="comma list from csv,json,svg")
    p.add_argument("--config", default=None, help="JSON file of option defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpfif", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    p = sub.add_parser("fit", help="build F and write curves and a summary")
    _add_common(p)
    p.add_argument("--lam-min", dest="lam_min", type=float, default=S)

    p = sub.add_parser("eval", help="evaluate F at given abscissae")
    _add_common(p)
    p.add_argument("--x", default=S, help="comma-separated abscissae")
    p.add_argument("--points", default=S, help="CSV with an x column")
    p.add_argument("--depth", type=int, default=S, help="also write attractor points at this refinement depth")

    p = sub.add_parser("curvature", help="curvature profiles of F and S and Menger curvature of the data")
    _add_common(p)

    p = sub.add_parser("optimize", help="minimize the curvature penalty over the scaling factors")
    _add_common(p)
    p.add_argument("--lam-min", dest="lam_min", type=float, default=S)
    p.add_argument("--sweeps", type=int, default=S)
    p.add_argument("--opt-tol", dest="opt_tol", type=float, default=S)
    p.add_argument("--init", default=S, help="initial scaling factors (scalar or comma list)")

    p = sub.add_parser("bench", help="timing of linear, cubic, pchip and FIF evaluation")
    _add_common(p)
    p.add_argument("--repetitions", type=int, default=S)
    p.add_argument("--counts", default=S)

    p = sub.add_parser("reproduce", help="regenerate a published table or figure")
    p.add_argument("target", choices=("table1", "table2", "fig_sensitivity", "stability"))
    _add_common(p)
    p.add_argument("--repetitions", type=int, default=S)
    p.add_argument("--counts", default=S)
    return parser


def resolve_config(ns: argparse.Namespace) -> dict:
    """Defaults, then the JSON config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if ns.config:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{ns.config}: invalid JSON ({exc})") from exc
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    cfg.update({k: v for k, v in vars(ns).items() if k in DEFAULTS})
    cfg["command"] = ns.command
    cfg["target"] = getattr(ns, "target", None)
    if cfg["data"] is not None and cfg["dataset"] is not None and "data" in vars(ns):
        cfg["dataset"] = None
    return cfg


def _floats(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse numbers from {text!r}") from exc


def load_data(cfg: dict) -> tuple[DataSet, str]:
    if cfg["data"] is not None:
        path = Path(cfg["data"])
        if not path.is_file():
            raise FileNotFoundError(f"input file not found: {path}")
        return read_dataset(path), path.stem
    name = cfg["dataset"] or "high_curvature"
    return analysis.canonical_dataset(name, seed=cfg["seed"], n=cfg["noise_n"], sigma=cfg["sigma"]), name


def _spline(cfg, data):
    return analysis.reference_spline(data, cfg["scheme"])


def _grid(cfg, data) -> Grid:
    n = cfg["grid"] or analysis.default_grid_size(data)
    return Grid.over(data, n)


def resolve_lambda(cfg: dict, data: DataSet, spline) -> tuple[np.ndarray, dict]:
    spec = cfg["lam"]
    info: dict = {"mode": None}
    if isinstance(spec, str) and spec == "reference":
        info["mode"] = "reference"
        return analysis.resample_scaling(analysis.PUBLISHED_LAMBDA, data.n_intervals), info
    if isinstance(spec, str) and spec == "optimize":
        info["mode"] = "optimize"
        res = _run_optimizer(cfg, data, spline)
        info["optimizer"] = res.to_dict()
        return res.lam, info
    if isinstance(spec, str) and spec.startswith("theorem4:"):
        eps = _floats(spec.split(":", 1)[1])
        if len(eps) != 1:
            raise ConfigError("theorem4 mode takes a single tolerance, e.g. theorem4:0.5")
        bounds = theorem4_bounds(data, spline, eps[0])
        info["mode"] = "theorem4"
        info["bounds"] = bounds.to_dict()
        return np.array(bounds.beta, dtype=float), info
    vals = _floats(spec)
    info["mode"] = "explicit"
    if len(vals) == 1:
        return np.full(data.n_intervals, vals[0]), info
    if len(vals) != data.n_intervals:
        raise ConfigError(f"--lambda has {len(vals)} values, data has {data.n_intervals} intervals")
    return np.array(vals), info


def _penalty_config(cfg, data) -> PenaltyConfig:
    n = cfg["grid"] or analysis.default_grid_size(data)
    if n % 2 == 0:
        n += data.n_intervals
    return PenaltyConfig(n=n, tol=cfg["opt_tol"], max_sweeps=cfg["sweeps"],
                         lam_min=cfg["lam_min"], base=cfg["base"], fp_tol=cfg["tol"])


def _run_optimizer(cfg, data, spline):
    pcfg = _penalty_config(cfg, data)
    init = None if cfg["init"] is None else analysis.resample_scaling(_floats(cfg["init"]), data.n_intervals)
    return minimize_penalty(data, spline, pcfg, init)


def _formats(cfg) -> set:
    fm = {f.strip() for f in str(cfg["formats"]).split(",") if f.strip()}
    bad = fm - {"csv", "json", "svg"}
    if bad:
        raise ConfigError(f"unknown output formats {sorted(bad)}")
    return fm


def _outdir(cfg) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_fit(cfg: dict) -> int:
    formats = _formats(cfg)
    data, name = load_data(cfg)
    spline = _spline(cfg, data)
    lam, info = resolve_lambda(cfg, data, spline)
    model = build_cp_cfif(data, lam, spline, base=cfg["base"])
    grid = _grid(cfg, data)
    curve = eval_fif_grid(model, grid, tol=cfg["tol"])
    pts = grid.points
    s_vals = eval_spline(spline, pts)
    kF = curvature_of(curve)
    kS = CurvatureProfile(pts, spline_curvature(spline, pts))
    dev = curvature_deviation(kF, kS)
    bounds = theorem4_bounds(data, spline, cfg["eps"])
    summary = {
        "dataset": name,
        "lambda": lam,
        "lambda_mode": info,
        "scheme": cfg["scheme"],
        "base": cfg["base"],
        "grid_n": grid.n,
        "rmse": float(np.sqrt(np.mean((curve.f - s_vals) ** 2))),
        "max_abs_error": float(np.max(np.abs(curve.f - s_vals))),
        "max_curvature_error": dev.max_err,
        "curvature_rmse": dev.rmse,
        "derivative_sources": list(curve.sources),
        "knot_max_error": float(np.max(np.abs(eval_fif(model, data.x) - data.u))),
        "bounds": bounds.to_dict(),
        "discrete_curvature": discrete_curvature(data),
        "published": analysis.PUBLISHED_TABLE1.get(name),
    }
    out = _outdir(cfg)
    if "csv" in formats:
        write_columns(out / "curve.csv", CURVE_HEADER, [pts, curve.f, curve.f1, curve.f2, s_vals, kF.kappa, kS.kappa])
    if "json" in formats:
        write_json(out / "summary.json", summary)
    if "svg" in formats:
        line_plot_svg(out / "curve.svg", [("F", pts, curve.f), ("S", pts, s_vals)], f"{name}: F and S", ylabel="value")
        line_plot_svg(out / "curvature.svg", [("kappa_F", pts, kF.kappa), ("kappa_S", pts, kS.kappa)],
                      f"{name}: curvature", ylabel="kappa")
    print(json.dumps({k: summary[k] for k in ("dataset", "rmse", "max_curvature_error")}, default=float))
    return EXIT_OK


def cmd_eval(cfg: dict) -> int:
    data, name = load_data(cfg)
    spline = _spline(cfg, data)
    lam, _ = resolve_lambda(cfg, data, spline)
    model = build_cp_cfif(data, lam, spline, base=cfg["base"])
    if cfg["points"] is not None:
        path = Path(cfg["points"])
        if not path.is_file():
            raise FileNotFoundError(f"points file not found: {path}")
        xq = np.loadtxt(path, delimiter=",", skiprows=1, usecols=0, ndmin=1)
    elif cfg["x"] is not None:
        xq = np.array(_floats(cfg["x"]))
    else:
        xq = data.x.copy()
    values = eval_fif(model, xq, cfg["tol"])
    attractor = refine_attractor(model, cfg["depth"]) if cfg["depth"] is not None else None
    out = _outdir(cfg)
    write_columns(out / "eval.csv", ("x", "F"), [xq, values])
    if attractor is not None:
        write_columns(out / "attractor.csv", ("x", "F"), [attractor.x, attractor.f])
    for a, b in zip(xq, values):
        print(f"{float(a)!r},{float(b)!r}")
    return EXIT_OK


def cmd_curvature(cfg: dict) -> int:
    formats = _formats(cfg)
    data, name = load_data(cfg)
    spline = _spline(cfg, data)
    lam, _ = resolve_lambda(cfg, data, spline)
    model = build_cp_cfif(data, lam, spline, base=cfg["base"])
    grid = _grid(cfg, data)
    curve = eval_fif_grid(model, grid, tol=cfg["tol"])
    pts = grid.points
    kF = curvature_of(curve)
    kS = CurvatureProfile(pts, spline_curvature(spline, pts))
    dev = curvature_deviation(kF, kS)
    out = _outdir(cfg)
    if "csv" in formats:
        write_columns(out / "curvature.csv", ("x", "kF", "kS", "abs_err"), [pts, kF.kappa, kS.kappa, dev.per_point])
    if "json" in formats:
        write_json(out / "curvature.json", {
            "dataset": name, "lambda": lam, "source": kF.source,
            "max_err": dev.max_err, "rmse": dev.rmse,
            "discrete_curvature": {"x": data.x[1:-1], "kappa": discrete_curvature(data)},
        })
    if "svg" in formats:
        line_plot_svg(out / "curvature.svg", [("kappa_F", pts, kF.kappa), ("kappa_S", pts, kS.kappa)],
                      f"{name}: curvature", ylabel="kappa")
    print(json.dumps({"max_err": dev.max_err, "rmse": dev.rmse}))
    return EXIT_OK


def cmd_optimize(cfg: dict) -> int:
    data, name = load_data(cfg)
    spline = _spline(cfg, data)
    res = _run_optimizer(cfg, data, spline)
    payload = {"dataset": name, "lam_min": cfg["lam_min"], **res.to_dict()}
    out = _outdir(cfg)
    write_json(out / "optimize.json", payload)
    print(json.dumps({"J": res.J, "lambda": [float(v) for v in res.lam], "sweeps": res.sweeps}))
    return EXIT_OK


def _datasets_for(cfg):
    if cfg["data"] is not None or cfg["dataset"] is not None:
        return [load_data(cfg)]
    return [(analysis.canonical_dataset(n, seed=cfg["seed"], n=cfg["noise_n"], sigma=cfg["sigma"]), n)
            for n in analysis.DATASETS]


def _timing_tables(cfg, stem: str) -> int:
    counts = [int(c) for c in _floats(cfg["counts"])]
    sets = _datasets_for(cfg)
    results = []
    for data, name in sets:
        lam = analysis.resample_scaling(analysis.PUBLISHED_LAMBDA, data.n_intervals)
        results.append((name, analysis.timing_bench(data, counts=counts, repetitions=cfg["repetitions"], lam=lam)))
    out = _outdir(cfg)
    rows, md = [], []
    for name, tr in results:
        ratio = tr.ratio()
        for method in tr.methods:
            for c, t in zip(tr.counts, tr.median[method]):
                rows.append((name, method, c, t))
        for method in tr.methods:
            md.append([name, method] + [f"{t:.3e}" for t in tr.median[method]] + [""])
        md.append([name, "FIF/cubic"] + [f"{r:.1f}x" for r in ratio] + [f"{tr.fitted_exponent():.3f}"])
    with open(out / f"{stem}.csv", "w", encoding="utf-8") as fh:
        fh.write("dataset,method,count,median_seconds\n")
        for r in rows:
            fh.write(f"{r[0]},{r[1]},{r[2]},{r[3]!r}\n")
    header = ["dataset", "method"] + [f"{c} pts" for c in counts] + ["FIF fitted exponent"]
    write_markdown_table(out / f"{stem}.md", header, md,
                         title="Execution time (median seconds); published FIF/cubic overhead band is 200-250x")
    write_json(out / f"{stem}.json", {name: tr.to_dict() for name, tr in results})
    for name, tr in results:
        print(f"{name}: ordered={tr.ordered()} fif/cubic={['%.1f' % r for r in tr.ratio()]}")
    return EXIT_OK


def cmd_bench(cfg: dict) -> int:
    return _timing_tables(cfg, "bench")


def cmd_reproduce(cfg: dict) -> int:
    target = cfg["target"]
    if target == "table2":
        return _timing_tables(cfg, "table2")
    out_needed = []
    if target == "table1":
        reports = analysis.table1(seed=cfg["seed"], scheme=cfg["scheme"], base=cfg["base"])
        rows = [
            [r.dataset, "[" + ", ".join(f"{v:.4g}" for v in r.lam) + "]", r.rmse, r.published.get("rmse"),
             r.max_curvature_error, r.published.get("max_curvature_error")]
            for r in reports
        ]
        out = _outdir(cfg)
        header = ["dataset", "lambda", "RMSE", "published RMSE", "max curvature error", "published max curvature error"]
        write_markdown_table(out / "table1.md", header, rows, title="RMSE and maximum curvature error")
        with open(out / "table1.csv", "w", encoding="utf-8") as fh:
            fh.write("dataset,rmse,published_rmse,max_curvature_error,published_max_curvature_error\n")
            for r in reports:
                fh.write(f"{r.dataset},{r.rmse!r},{r.published['rmse']!r},{r.max_curvature_error!r},"
                         f"{r.published['max_curvature_error']!r}\n")
        write_json(out / "table1.json", [r.to_dict() for r in reports])
        for row in rows:
            print(row[0], f"rmse={row[2]:.4e}", f"max_kappa_err={row[4]:.4f}")
        return EXIT_OK
    sets = _datasets_for(cfg)
    if target == "fig_sensitivity":
        results = [(name, analysis.sensitivity_sweep(data, scheme=cfg["scheme"], base=cfg["base"]))
                   for data, name in sets]
        out = _outdir(cfg)
        md = []
        for name, res in results:
            lams = sorted(res.slopes)
            series = [("S'", res.x, res.spline_slope)] + [(f"lambda={v:g}", res.x, res.slopes[v]) for v in lams if v > 0]
            line_plot_svg(out / f"sensitivity_{name}.svg", series, f"{name}: first derivative", ylabel="F'")
            write_columns(out / f"sensitivity_{name}.csv", ["x", "S1"] + [f"F1_lambda_{v:g}" for v in lams],
                          [res.x, res.spline_slope] + [res.slopes[v] for v in lams])
            for v in lams:
                md.append([name, v, res.distance[v]])
            print(f"{name}: monotone={res.monotone} skipped={res.skipped}")
        write_markdown_table(out / "fig_sensitivity.md", ["dataset", "lambda", "sup dist F1 to S1"], md,
                             title="First-derivative sensitivity to uniform scaling factors")
        return EXIT_OK
    if target == "stability":
        out = _outdir(cfg)
        md, csv_rows = [], []
        for data, name in sets:
            res = analysis.stability_sweep(data, analysis.PUBLISHED_LAMBDA, scheme=cfg["scheme"], base=cfg["base"])
            ratios = np.concatenate([[np.nan], res.ratios()])
            for (dl, eff, dev), r in zip(res.rows(), ratios):
                md.append([name, dl, eff, dev, "" if not np.isfinite(r) else float(r)])
                csv_rows.append((name, dl, eff, dev, r))
            print(f"{name}: C1={res.c1:.4g} last ratio={res.ratios()[-1]:.4f}")
        write_markdown_table(out / "stability.md", ["dataset", "delta", "max dlambda", "max dkappa", "ratio"], md,
                             title="Curvature stability under scaling-factor perturbations")
        with open(out / "stability.csv", "w", encoding="utf-8") as fh:
            fh.write("dataset,delta,effective,deviation,ratio\n")
            for r in csv_rows:
                fh.write(",".join([r[0]] + [repr(float(v)) for v in r[1:]]) + "\n")
        return EXIT_OK
    raise ConfigError(f"unknown target {target!r}")


COMMANDS = {
    "fit": cmd_fit,
    "eval": cmd_eval,
    "curvature": cmd_curvature,
    "optimize": cmd_optimize,
    "bench": cmd_bench,
    "reproduce": cmd_reproduce,
}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(ns)
        return COMMANDS[ns.command](cfg)
    except (InadmissibleScalingError, InterpolationError, ResourceLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
