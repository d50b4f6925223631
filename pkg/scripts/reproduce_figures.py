#!/usr/bin/env python3
"""Regenerate the data and SVG plots for the four figure presets.

    python3 scripts/reproduce_figures.py --out figures --samples 512
"""

import argparse
import time
from pathlib import Path

from infall.cli import parse_args, plot_table, run_many
from infall.plot import render_plot
from infall.tables import write_table

FIGURES = ("figure1", "figure2", "figure3", "figure4")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figures")
    ap.add_argument("--samples", type=int, default=512)
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    specs = [parse_args([f, "--samples", str(args.samples)] + ([] if f == "figure1" else ["--with-time"]))
             for f in FIGURES]
    t0 = time.perf_counter()
    tables = run_many(specs, workers=args.workers)
    for name, table in zip(FIGURES, tables):
        write_table(table, args.format, out / f"{name}.{args.format}")
        # time spans orders of magnitude more than the rest; keep it off the shared axis
        plot = plot_table(table, drop_time=True)
        x = "eb" if name in ("figure1", "figure2") else "r"
        render_plot(plot, out / f"{name}.svg", x_column=x, title=name)
        solver = table.metadata.get("solver") or {}
        print(f"{name}: {len(table.rows)} rows, partial={table.metadata['partial']}, "
              f"stop={solver.get('stop_reason', '-')}")
    print(f"done in {time.perf_counter() - t0:.2f} s -> {out}/")


if __name__ == "__main__":
    main()
