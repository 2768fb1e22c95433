"""Plot success rate and mean relative error per sparsity level from
`quasisparse sweep` CSV output.

    quasisparse sweep --out sweep.csv
    python scripts/plot_sweep.py sweep.csv sweep.png
"""

import sys

import matplotlib.pyplot as plt
import pandas as pd


def main(src, dst):
    sweep = pd.read_csv(src)
    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    for alg, rows in sweep.groupby("algorithm", sort=False):
        left.plot(rows["r"], rows["success_rate"], marker="o", label=alg.upper())
        right.semilogy(rows["r"], rows["mean_relative_error"], marker="o", label=alg.upper())
    left.set_xlabel("sparsity r")
    left.set_ylabel("success rate")
    right.set_xlabel("sparsity r")
    right.set_ylabel("mean relative error")
    left.legend()
    fig.tight_layout()
    fig.savefig(dst, dpi=150)


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2] if len(sys.argv) > 2 else "sweep.png")
