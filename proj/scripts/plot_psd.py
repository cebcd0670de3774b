#!/usr/bin/env python3
"""Log-log power spectral density from `memrc psd` output, with an optional power-law fit."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("psd", help="freq_hz,power CSV")
    parser.add_argument("-o", "--output", default="psd.png")
    parser.add_argument("--fit", nargs=2, type=float, metavar=("F_LO", "F_HI"), help="fit band in Hz")
    args = parser.parse_args()

    df = pd.read_csv(args.psd, comment="#")
    df = df[(df["freq_hz"] > 0) & (df["power"] > 0)]

    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.loglog(df["freq_hz"], df["power"], lw=1)
    if args.fit:
        band = df[(df["freq_hz"] >= args.fit[0]) & (df["freq_hz"] <= args.fit[1])]
        slope, intercept = np.polyfit(np.log10(band["freq_hz"]), np.log10(band["power"]), 1)
        ax.loglog(band["freq_hz"], 10 ** intercept * band["freq_hz"] ** slope, "--", label=f"slope {slope:.2f}")
        ax.legend()
        print(f"power-law exponent {slope:.3f}")
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel("power spectral density")
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
