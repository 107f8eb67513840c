"""Plot curve_samples.csv and shocks.csv from an ``eqarea run`` output directory.

Usage: python3 scripts/plot_curves.py OUT_DIR [--times 0 1 2] [--save fig.png]
Needs matplotlib, which is not a package dependency.
"""
import argparse
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", type=Path)
    ap.add_argument("--times", type=float, nargs="*")
    ap.add_argument("--save", type=Path)
    args = ap.parse_args()

    curves = defaultdict(list)
    for r in read(args.out / "curve_samples.csv"):
        curves[float(r["t"])].append((float(r["s"]), float(r["x"]), float(r["u"]), r["branch"]))
    shocks = defaultdict(list)
    for r in read(args.out / "shocks.csv"):
        shocks[float(r["t"])].append((float(r["X"]), float(r["uL"]), float(r["uR"])))

    times = sorted(curves)
    if args.times:
        times = [min(times, key=lambda t: abs(t - want)) for want in args.times]
    elif len(times) > 6:
        times = times[:: max(1, len(times) // 6)]

    fig, ax = plt.subplots(figsize=(8, 5))
    for i, t in enumerate(times):
        pts = sorted(curves[t])
        c = f"C{i % 10}"
        ax.plot([p[1] for p in pts], [p[2] for p in pts], color=c, lw=0.8, alpha=0.5)
        fold = [p for p in pts if p[3] == "fold"]
        if fold:
            ax.plot([p[1] for p in fold], [p[2] for p in fold], ".", color=c, ms=2)
        for X, uL, uR in shocks.get(t, []):
            ax.vlines(X, min(uL, uR), max(uL, uR), color=c, lw=2)
        ax.plot([], [], color=c, label=f"t = {t:g}")
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.legend(fontsize=8)
    if args.save:
        fig.savefig(args.save, dpi=150, bbox_inches="tight")
    else:
        fig.savefig(args.out / "curves.png", dpi=150, bbox_inches="tight")


if __name__ == "__main__":
    main()
