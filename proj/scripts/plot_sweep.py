#!/usr/bin/env python3
"""Plot the beta sweep written by `droplet_lab sweep`.

Reads sweep.csv (spectral sweep) and optionally survival_sweep.csv (Monte
Carlo sweep over the same beta list) and writes a three-panel figure:
eigenvalues on a log scale, the exponential rate beta^-1 ln lambda_1, and the
rescaled droplet moment beta * E_qsd[(1/N) sum |y_i|^2].

Usage: plot_sweep.py OUTDIR [--mc OUTDIR2] [--save FILE.png]
where OUTDIR is the --out directory of a sweep run.
"""
import argparse
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_csv(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    if not rows:
        sys.exit(f"{path}: no data rows")
    return rows


def column(rows, name):
    return [float(r[name]) for r in rows]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("outdir", help="directory holding sweep.csv")
    ap.add_argument("--mc", help="directory holding survival_sweep.csv to overlay")
    ap.add_argument("--save", default="sweep.png", help="output image path")
    args = ap.parse_args()

    rows = read_csv(Path(args.outdir) / "sweep.csv")
    beta = column(rows, "beta")
    lam_names = [k for k in rows[0] if k.startswith("lambda")]
    lam_names.sort(key=lambda s: int(s[len("lambda"):]))

    fig, axes = plt.subplots(1, 3, figsize=(13, 4))

    ax = axes[0]
    for name in lam_names:
        ax.semilogy(beta, column(rows, name), "o-", label=name)
    ax.set_xlabel("beta")
    ax.set_ylabel("eigenvalue")
    ax.set_title("killed-generator spectrum")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)

    ax = axes[1]
    ax.plot(beta, column(rows, "rate1"), "o-", label="spectral")
    if args.mc:
        mc = read_csv(Path(args.mc) / "survival_sweep.csv")
        ok = [r for r in mc if r["censored"] == "0" and r["lambda1_hat"] not in ("", "nan")]
        if ok:
            import math

            ax.plot(
                [float(r["beta"]) for r in ok],
                [math.log(float(r["lambda1_hat"])) / float(r["beta"]) for r in ok],
                "s--",
                label="survival fit",
            )
    ax.set_xlabel("beta")
    ax.set_ylabel(r"$\beta^{-1} \ln \lambda_1$")
    ax.set_title("exponential rate")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)

    ax = axes[2]
    ax.plot(beta, column(rows, "beta_droplet_msq"), "o-")
    ax.set_xlabel("beta")
    ax.set_ylabel(r"$\beta \, E_{qsd}[\frac{1}{N}\sum |y_i|^2]$")
    ax.set_title("droplet length scale")
    ax.grid(True, alpha=0.3)

    fig.tight_layout()
    fig.savefig(args.save, dpi=150)
    print(f"wrote {args.save}")


if __name__ == "__main__":
    main()
