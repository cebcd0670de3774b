#!/usr/bin/env python3
"""Node state trace from trace.csv."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("trace", help="trace.csv written when experiment.trace = true")
    parser.add_argument("-o", "--output", default="trace.png")
    args = parser.parse_args()

    df = pd.read_csv(args.trace, comment="#")
    fig, ax = plt.subplots(figsize=(8, 3))
    ax.plot(df["t"], df["value"], lw=0.7)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("node 0 state (V)")
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
