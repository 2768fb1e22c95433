"""Plot prox curves from `quasisparse prox-table` CSV output.

    quasisparse prox-table --a 1,2,3,5 --lambda 0.25 --out prox.csv
    python scripts/plot_prox_table.py prox.csv prox.png
"""

import sys

import matplotlib.pyplot as plt
import pandas as pd


def main(src, dst):
    table = pd.read_csv(src)
    fig, ax = plt.subplots(figsize=(6, 4))
    for a, curve in table.groupby("a"):
        ax.plot(curve["gamma"], curve["prox"], label=f"a = {a:g}")
    ax.plot(table["gamma"], table["gamma"], color="grey", lw=0.5, ls="--")
    ax.set_xlabel("gamma")
    ax.set_ylabel("prox(gamma)")
    ax.set_title(f"lambda = {table['lambda'].iloc[0]:g}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(dst, dpi=150)


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2] if len(sys.argv) > 2 else "prox.png")
