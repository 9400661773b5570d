"""Plot mean relative error against k (one line per n) and against n (one line per k).

Reads plot_data.csv written by ``sfnash bench`` or run_bench.py. Needs matplotlib.
"""

import argparse
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def load(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [(int(r["n"]), int(r["k"]), float(r["mean_relative_eps"])) for r in rows]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("plot_data")
    ap.add_argument("--out", help="output directory (default: next to the input)")
    ap.add_argument("--k", type=int, nargs="+", default=[1, 10, 100])
    args = ap.parse_args()
    out = args.out or os.path.dirname(os.path.abspath(args.plot_data))
    os.makedirs(out, exist_ok=True)
    data = load(args.plot_data)
    ns = sorted({n for n, _, _ in data})

    fig, ax = plt.subplots(figsize=(5, 3.5))
    for n in ns:
        pts = sorted((k, e) for m, k, e in data if m == n)
        ax.plot([k for k, _ in pts], [e for _, e in pts], label=f"n = {n}")
    ax.set_xscale("log")
    ax.set_xlabel("sweeps k")
    ax.set_ylabel("mean relative error")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(os.path.join(out, "error_vs_k.png"), dpi=150)

    fig, ax = plt.subplots(figsize=(5, 3.5))
    for k in args.k:
        pts = sorted((n, e) for n, m, e in data if m == k)
        if pts:
            ax.plot([n for n, _ in pts], [e for _, e in pts], marker="o", label=f"k = {k}")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("players n")
    ax.set_ylabel("mean relative error")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(os.path.join(out, "error_vs_n.png"), dpi=150)
    print(f"wrote error_vs_k.png and error_vs_n.png to {out}")


if __name__ == "__main__":
    main()
