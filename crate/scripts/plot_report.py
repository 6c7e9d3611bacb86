#!/usr/bin/env python3
"""Plot a tidy significance report written by `pathsig ... --format csv`.

One panel per pair: observed statistic, null mean, the band, and shaded
significant points.

    pathsig slidearea -i data.csv --window 0.1 --seed 42 --format csv -o report.csv
    python3 scripts/plot_report.py report.csv -o report.png
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("report")
    ap.add_argument("-o", "--output", default="report.png")
    args = ap.parse_args()

    df = pd.read_csv(args.report, comment="#")
    df["significant"] = df["significant"].astype(str).str.lower().isin(["1", "true"])
    pairs = list(dict.fromkeys(df["pair"]))

    fig, axes = plt.subplots(len(pairs), 1, sharex=True, figsize=(8, 2.4 * len(pairs)), squeeze=False)
    for ax, pair in zip(axes[:, 0], pairs):
        d = df[df["pair"] == pair]
        ax.fill_between(d["time"], d["band_lo"], d["band_hi"], color="0.85", label="null band")
        ax.plot(d["time"], d["null_mean"], color="0.5", lw=0.8, label="null mean")
        ax.plot(d["time"], d["observed"], color="C0", lw=1.2, label="observed")
        sig = d[d["significant"]]
        ax.scatter(sig["time"], sig["observed"], color="C3", s=8, zorder=3, label="significant")
        ax.set_ylabel(pair)
    axes[0, 0].set_title(df["statistic"].iloc[0])
    axes[0, 0].legend(loc="upper right", fontsize="small")
    axes[-1, 0].set_xlabel("time")
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)


if __name__ == "__main__":
    main()
