#!/usr/bin/env python3
"""Heatmap of the primary metric over the (v, lambda) grid from heatmap.csv."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("heatmap", help="heatmap.csv written by `memrc sweep`")
    parser.add_argument("-o", "--output", default="heatmap.png")
    parser.add_argument("--normalize", type=float, default=None, help="divide the metric by this (e.g. N for MC)")
    args = parser.parse_args()

    df = pd.read_csv(args.heatmap, comment="#")
    metric = df["metric"].iloc[0]
    grid = df.pivot(index="lambda", columns="v", values="mean")
    if args.normalize:
        grid = grid / args.normalize

    fig, ax = plt.subplots(figsize=(6, 4.5))
    mesh = ax.pcolormesh(grid.columns, grid.index, grid.values, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=metric if not args.normalize else f"{metric} / {args.normalize:g}")
    tainted = df[df["tainted"] == 1]
    if not tainted.empty:
        ax.scatter(tainted["v"], tainted["lambda"], marker="x", color="red", label="tainted")
        ax.legend(loc="upper right")
    ax.set_xlabel("input coefficient v")
    ax.set_ylabel("spectral radius lambda")
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
