#!/usr/bin/env python3
"""Batch figure renderer for simulator CSV outputs.

Two figure kinds, fed by the CSV files the simulator CLI writes:

* ``region``: the two-receiver SDR trade-off, one styled line per data
  series (mlm, mlm_no_interference, separation, hull, ideal).
* ``sweep``: achieved SDR and the distortion-theoretic optimum against
  channel SNR.

This tool only draws; every number in a figure comes verbatim from the
input CSV.  Usage:

    render.py --kind region --in region.csv --out region.svg --scale db
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


class SchemaError(ValueError):
    """The CSV is missing a column the figure kind needs."""


class NoDataError(ValueError):
    """The CSV has no data rows."""


REGION_COLUMNS = ("alpha_c", "sdr1", "sdr2", "sdr1_db", "sdr2_db", "series")
SWEEP_COLUMNS = ("snr_db", "sdr", "sdr_db", "sdr_opt")

REGION_STYLES = {
    "separation": {"color": "tab:blue", "linestyle": "-"},
    "mlm": {"color": "tab:red", "linestyle": "-."},
    "mlm_no_interference": {"color": "tab:green", "linestyle": "--",
                            "marker": "o", "markersize": 5},
    "hull": {"color": "0.55", "linestyle": ":"},
    "ideal": {"color": "black", "linestyle": "", "marker": "*", "markersize": 12},
}


@dataclass
class FigureSpec:
    input_csv: str
    kind: str  # "region" or "sweep"
    output: str
    scale: str = "linear"  # "linear" or "db"
    styles: dict = field(default_factory=dict)


def load_rows(path: str, required: tuple[str, ...]) -> list[dict]:
    """Read a simulator CSV, skipping comment lines, checking the schema."""
    with open(path, encoding="utf-8") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        rows = list(reader)
        columns = reader.fieldnames or []
    for col in required:
        if col not in columns:
            raise SchemaError(f"missing column {col!r} in {path}")
    if not rows:
        raise NoDataError(f"no data rows in {path}")
    return rows


def _to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def build_region_figure(rows: list[dict], scale: str = "linear",
                        styles: dict | None = None):
    """SDR1 against SDR2, one labeled artist per series."""
    series_names = []
    for row in rows:
        if row["series"] not in series_names:
            series_names.append(row["series"])
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    db = scale == "db"
    xcol, ycol = ("sdr1_db", "sdr2_db") if db else ("sdr1", "sdr2")
    for name in series_names:
        xs = [float(r[xcol]) for r in rows if r["series"] == name]
        ys = [float(r[ycol]) for r in rows if r["series"] == name]
        style = dict(REGION_STYLES.get(name, {"linestyle": "-"}))
        style.update((styles or {}).get(name, {}))
        if len(xs) == 1 and "marker" not in style:
            style["marker"] = "o"
        ax.plot(xs, ys, label=name, **style)
    unit = "dB" if db else "linear"
    ax.set_xlabel(f"SDR at receiver 1 ({unit})")
    ax.set_ylabel(f"SDR at receiver 2 ({unit})")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    return fig


def build_sweep_figure(rows: list[dict], scale: str = "linear",
                       styles: dict | None = None):
    """Achieved SDR and the optimum against channel SNR in dB."""
    snr = [float(r["snr_db"]) for r in rows]
    db = scale == "db"
    sdr = [float(r["sdr_db"]) if db else float(r["sdr"]) for r in rows]
    opt = [_to_db(float(r["sdr_opt"])) if db else float(r["sdr_opt"]) for r in rows]
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    base = {"sdr": {"color": "tab:red", "linestyle": "", "marker": "x"},
            "sdr_opt": {"color": "black", "linestyle": "-"}}
    for name, ys in (("sdr", sdr), ("sdr_opt", opt)):
        style = dict(base[name])
        style.update((styles or {}).get(name, {}))
        ax.plot(snr, ys, label=name, **style)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("SDR (dB)" if db else "SDR (linear)")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    return fig


def render(spec: FigureSpec):
    """Build the figure for ``spec`` and write it to ``spec.output``.

    Returns the matplotlib figure so callers can inspect the data layer.
    """
    if spec.kind == "region":
        rows = load_rows(spec.input_csv, REGION_COLUMNS)
        fig = build_region_figure(rows, spec.scale, spec.styles)
    elif spec.kind == "sweep":
        rows = load_rows(spec.input_csv, SWEEP_COLUMNS)
        fig = build_sweep_figure(rows, spec.scale, spec.styles)
    else:
        raise ValueError(f"unknown figure kind {spec.kind!r}")
    fig.savefig(spec.output)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--kind", choices=["region", "sweep"], required=True)
    parser.add_argument("--in", dest="input_csv", required=True)
    parser.add_argument("--out", dest="output", required=True)
    parser.add_argument("--scale", choices=["linear", "db"], default="linear")
    args = parser.parse_args(argv)
    try:
        fig = render(FigureSpec(kind=args.kind, input_csv=args.input_csv,
                                output=args.output, scale=args.scale))
        plt.close(fig)
    except (SchemaError, NoDataError, OSError, ValueError) as exc:
        print(f"render failed: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
