#!/usr/bin/env python3
"""Device switching excursion against amplitude and I-V hysteresis from `memrc device-calibrate` output."""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("directory", help="directory holding calibration.csv and switching.csv")
    parser.add_argument("-o", "--output", default="calibration.png")
    args = parser.parse_args()

    root = Path(args.directory)
    calib = pd.read_csv(root / "calibration.csv", comment="#")
    trace = pd.read_csv(root / "switching.csv", comment="#")

    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    left.semilogy(calib["amplitude_v"], calib["w_excursion"].clip(lower=1e-12), marker=".")
    left.set_xlabel("sine amplitude (V)")
    left.set_ylabel("state excursion")
    for amplitude, rows in trace.groupby("amplitude_v"):
        right.plot(rows["v"], rows["i"], lw=1, label=f"{amplitude:g} V")
    right.set_xlabel("voltage (V)")
    right.set_ylabel("current (A)")
    right.legend()
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
