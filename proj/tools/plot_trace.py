#!/usr/bin/env python3
"""Plot consensus error, stationarity and objective from dssg trace CSVs.

    python3 tools/plot_trace.py OUT_DIR [--output fig.png]

Reads every trace_seed*.csv in OUT_DIR. Needs matplotlib.
"""

import argparse
import csv
import glob
import math
import os
import sys

PANELS = [
    ("consensus_error", "consensus error", True),
    ("stationarity_at_mean", "stationarity at mean", True),
    ("objective_at_mean", "objective at mean", False),
]


def load(path):
    cols = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            for key, value in row.items():
                cols.setdefault(key, []).append(float(value))
    return cols


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out_dir")
    ap.add_argument("--output", default=None, help="image path (default: OUT_DIR/trace.png)")
    args = ap.parse_args()

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        sys.exit("matplotlib is not installed")

    traces = sorted(glob.glob(os.path.join(args.out_dir, "trace_seed*.csv")))
    if not traces:
        sys.exit(f"no trace_seed*.csv in {args.out_dir}")

    fig, axes = plt.subplots(1, len(PANELS), figsize=(5 * len(PANELS), 4))
    for path in traces:
        cols = load(path)
        label = os.path.basename(path)[len("trace_"):-len(".csv")]
        for ax, (key, title, logy) in zip(axes, PANELS):
            pts = [(n, v) for n, v in zip(cols["nu"], cols[key]) if not math.isnan(v)]
            if logy:
                pts = [(n, v) for n, v in pts if v > 0]
            if pts:
                ax.plot(*zip(*pts), lw=0.8, label=label)
    for ax, (key, title, logy) in zip(axes, PANELS):
        ax.set_title(title)
        ax.set_xlabel("iteration")
        if logy:
            ax.set_yscale("log")
    axes[0].legend(fontsize="small")
    fig.tight_layout()
    out = args.output or os.path.join(args.out_dir, "trace.png")
    fig.savefig(out, dpi=120)
    print(out)


if __name__ == "__main__":
    main()
