#!/usr/bin/env python3
"""Violin plot of relative eigenvalue errors from one or more errors.csv files.

Usage: plot_errors.py errors.csv [more.csv ...] -o errors.png
"""
import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("inputs", nargs="+", help="errors.csv written by genspec compare")
    ap.add_argument("-o", "--output", default="errors.png")
    ap.add_argument("--absolute", action="store_true", help="plot |error| instead of the signed error")
    args = ap.parse_args()

    df = pd.concat([pd.read_csv(p) for p in args.inputs], ignore_index=True)
    df = df[df["index_nontrivial"] > 0]
    column = "abs_error" if args.absolute else "error"
    groups = df.groupby(["estimator", "dt", "index_nontrivial"])

    fig, ax = plt.subplots(figsize=(1.2 * max(len(groups), 3) + 1, 4))
    data = [g[column].to_numpy() for _, g in groups]
    labels = [f"{est} dt={dt:g}\nλ{i + 1}" for (est, dt, i), _ in groups]
    ax.violinplot(data, showmedians=True)
    ax.set_xticks(range(1, len(labels) + 1), labels)
    ax.axhline(0.0, color="grey", lw=0.8)
    ax.set_ylabel("|λ̂ − λ| / |λ|" if args.absolute else "(λ̂ − λ) / λ")
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
