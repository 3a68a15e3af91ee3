#!/usr/bin/env python3
"""Render benchmark figures from the experiment CSV outputs.

Consumes the aggregate CSV (per-cell regret/stockout statistics) and
optionally a trace CSV (single-trial inventory trajectory) and emits up to
three panels: regret vs T with error bars, stockouts vs T, and the
inventory trajectory.  Values are plotted exactly as found in the CSVs; a
figure-spec JSON with every plotted point is written next to the images so
downstream checks can verify fidelity without parsing image files.

Usage:
  python3 render_figures.py --input exp_agg.csv --trace exp_trace.csv \
      --out figures/exp
"""

import argparse
import csv
import json
import sys
from pathlib import Path

AGG_COLUMNS = ["experiment_id", "algorithm", "model", "T", "trials",
               "mean_regret", "std_err", "mean_reward", "mean_hindsight",
               "mean_stockouts", "benchmark_kind"]
TRACE_COLUMNS = ["experiment_id", "algorithm", "model", "T", "trial",
                 "resource", "t", "inventory"]

# paper-style defaults: blue for the adapted baseline, orange for ours
DEFAULT_COLORS = ["tab:blue", "tab:orange", "tab:green", "tab:red",
                  "tab:purple", "tab:brown"]
PANELS = ("regret", "stockouts", "trace")


class SchemaError(Exception):
    """CSV does not match the documented harness schema."""


def read_rows(path, expected_columns):
    """Load a harness CSV, insisting on the exact documented header."""
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"{path}: file not found")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise SchemaError(f"{path}: empty file, no header")
        missing = [c for c in expected_columns if c not in header]
        extra = [c for c in header if c not in expected_columns]
        if missing or extra:
            raise SchemaError(
                f"{path}: header mismatch; missing columns {missing or 'none'},"
                f" unexpected columns {extra or 'none'}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def series_from_aggregate(rows, algorithms, value_col, err_col=None):
    """Per-algorithm (T, value, err) series sorted by horizon."""
    out = []
    for alg in algorithms:
        mine = [r for r in rows if r["algorithm"] == alg]
        if not mine:
            raise SchemaError(f"algorithm {alg!r} not present in aggregate CSV")
        mine.sort(key=lambda r: int(r["T"]))
        series = {
            "label": alg,
            "x": [int(r["T"]) for r in mine],
            "y": [float(r[value_col]) for r in mine],
        }
        if err_col is not None:
            series["yerr"] = [float(r[err_col]) for r in mine]
        out.append(series)
    return out


def trace_series(rows):
    rows = sorted(rows, key=lambda r: int(r["t"]))
    alg = rows[0]["algorithm"]
    res = rows[0]["resource"]
    return [{
        "label": f"{alg} (resource {res})",
        "x": [int(r["t"]) for r in rows],
        "y": [float(r["inventory"]) for r in rows],
    }]


def build_figure_spec(args):
    """Assemble the exact points to plot from the input CSVs."""
    panels = {}
    if args.input:
        agg = read_rows(args.input, AGG_COLUMNS)
        algorithms = args.algorithms or sorted({r["algorithm"] for r in agg})
        if "regret" in args.panels:
            panels["regret"] = {
                "title": "Mean regret vs horizon",
                "xlabel": "T", "ylabel": "mean regret",
                "series": series_from_aggregate(agg, algorithms,
                                                "mean_regret", "std_err"),
            }
        if "stockouts" in args.panels:
            panels["stockouts"] = {
                "title": "Mean stockout count vs horizon",
                "xlabel": "T", "ylabel": "mean stockouts",
                "series": series_from_aggregate(agg, algorithms,
                                                "mean_stockouts"),
            }
    if args.trace and "trace" in args.panels:
        panels["trace"] = {
            "title": "Inventory trajectory",
            "xlabel": "t", "ylabel": "inventory",
            "series": trace_series(read_rows(args.trace, TRACE_COLUMNS)),
        }
    if not panels:
        raise SchemaError("nothing to plot: no aggregate/trace input matched "
                          "the requested panels")
    return {"panels": panels, "colors": args.colors}


def render(spec, out_prefix, formats):
    """Draw each panel from the spec; one image per panel and format."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_prefix = Path(out_prefix)
    out_prefix.parent.mkdir(parents=True, exist_ok=True)
    written = []
    for name, panel in spec["panels"].items():
        fig, ax = plt.subplots(figsize=(4.5, 3.4))
        for k, s in enumerate(panel["series"]):
            color = spec["colors"][k % len(spec["colors"])]
            if "yerr" in s:
                ax.errorbar(s["x"], s["y"], yerr=s["yerr"], color=color,
                            marker="o", markersize=3.5, capsize=2.5,
                            linewidth=1.4, label=s["label"])
            else:
                ax.plot(s["x"], s["y"], color=color, marker="o",
                        markersize=3.5, linewidth=1.4, label=s["label"])
        ax.set_title(panel["title"], fontsize=10)
        ax.set_xlabel(panel["xlabel"])
        ax.set_ylabel(panel["ylabel"])
        if name in ("regret", "stockouts"):
            ax.set_xscale("log")
        ax.legend(fontsize=8, frameon=False)
        fig.tight_layout()
        for ext in formats:
            target = out_prefix.parent / f"{out_prefix.name}_{name}.{ext}"
            fig.savefig(target, dpi=150)
            written.append(target)
        plt.close(fig)
    return written


def main(argv=None):
    ap = argparse.ArgumentParser(
        description="Render regret/stockout/inventory panels from harness CSVs")
    ap.add_argument("--input", help="aggregate CSV ({id}_agg.csv)")
    ap.add_argument("--trace", help="inventory trace CSV")
    ap.add_argument("--out", required=True,
                    help="output path prefix, e.g. figures/exp")
    ap.add_argument("--panels", nargs="+", default=list(PANELS),
                    choices=PANELS, help="which panels to render")
    ap.add_argument("--algorithms", nargs="+",
                    help="algorithm labels to plot, in color order "
                         "(default: all, sorted)")
    ap.add_argument("--colors", nargs="+", default=DEFAULT_COLORS,
                    help="matplotlib colors matched to --algorithms order")
    ap.add_argument("--formats", nargs="+", default=["png", "pdf"],
                    help="image formats to write")
    ap.add_argument("--spec-only", action="store_true",
                    help="write the figure-spec JSON without rendering images")
    args = ap.parse_args(argv)

    try:
        spec = build_figure_spec(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_prefix = Path(args.out)
    out_prefix.parent.mkdir(parents=True, exist_ok=True)
    spec_path = out_prefix.parent / f"{out_prefix.name}_figure_spec.json"
    with open(spec_path, "w") as fh:
        json.dump(spec, fh, indent=2, sort_keys=True)
    print(f"figure spec: {spec_path}")
    if not args.spec_only:
        for target in render(spec, out_prefix, args.formats):
            print(f"wrote: {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
