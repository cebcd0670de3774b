#!/usr/bin/env python3
"""Best-cell metric per architecture against count from comparison.csv."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("comparison", help="comparison.csv written by `memrc run` with compare_counts")
    parser.add_argument("-o", "--output", default="comparison.png")
    args = parser.parse_args()

    df = pd.read_csv(args.comparison, comment="#")
    best = df[df["best"] == 1].sort_values("count")
    metric = df["metric"].iloc[0]

    fig, ax = plt.subplots(figsize=(5.5, 4))
    for arch, rows in best.groupby("architecture"):
        ax.errorbar(rows["count"], rows["mean"], yerr=rows["stdev"], marker="o", capsize=3, label=arch)
    ax.set_xscale("log", base=2)
    ax.set_xlabel("reservoir nodes / readout pairs")
    ax.set_ylabel(f"best {metric}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)

    for count, rows in best.groupby("count"):
        by_arch = dict(zip(rows["architecture"], rows["mean"]))
        if "scr" in by_arch and "single-network" in by_arch:
            print(f"count {count}: improvement {100 * (1 - by_arch['scr'] / by_arch['single-network']):.1f}%")


if __name__ == "__main__":
    main()
