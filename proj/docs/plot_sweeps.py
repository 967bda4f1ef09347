#!/usr/bin/env python3
"""Plot gtps sweep CSVs (documentation example, not part of the test surface).

Usage:
    python3 docs/plot_sweeps.py fig1.csv          # integrability sweep
    python3 docs/plot_sweeps.py fig2a.csv         # disorder sweep
"""
import csv
import sys

import matplotlib.pyplot as plt


def load(path):
    rows, header = [], None
    with open(path) as f:
        for line in f:
            if line.startswith("#"):
                continue
            if header is None:
                header = line.strip().split(",")
                continue
            rows.append(dict(zip(header, line.strip().split(","))))
    return rows


def main(path):
    rows = load(path)
    fig, ax = plt.subplots(figsize=(5, 3.2))
    if "mean_g" in rows[0]:  # disorder sweep
        x = [float(r["strength"]) for r in rows]
        y = [float(r["mean_g"]) for r in rows]
        e = [float(r["stderr_g"]) for r in rows]
        ax.errorbar(x, y, yerr=e, marker="o")
        ax.set_xlabel("disorder strength")
    else:  # integrability sweep; endpoints use the one-sided stencil
        pts = [r for r in rows if r["endpoint"] == "0"]
        x = [float(r["h"]) for r in pts]
        y = [float(r["g"]) for r in pts]
        ax.plot(x, y, marker="o")
        ax.set_xlabel("h")
    ax.set_ylabel("algebra susceptibility g")
    ax.set_yscale("log")
    fig.tight_layout()
    out = path.rsplit(".", 1)[0] + ".png"
    fig.savefig(out, dpi=150)
    print("wrote", out)


if __name__ == "__main__":
    main(sys.argv[1])
