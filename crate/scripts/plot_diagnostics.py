"""Plot a few diagnostics.csv columns against time.

    python scripts/plot_diagnostics.py out/standard_ring/diagnostics.csv [plot.png]
"""
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

COLUMNS = ["v_l2", "rho_l2", "gamma_l2", "vr_over_r_linf", "support_dist_to_axis", "support_z_diameter"]


def main():
    src = sys.argv[1]
    dst = sys.argv[2] if len(sys.argv) > 2 else src.rsplit(".", 1)[0] + ".png"
    df = pd.read_csv(src)
    fig, axes = plt.subplots(2, 3, figsize=(12, 6), sharex=True)
    for ax, col in zip(axes.flat, COLUMNS):
        ax.plot(df["t"], df[col])
        ax.set_title(col)
    for ax in axes[-1]:
        ax.set_xlabel("t")
    fig.tight_layout()
    fig.savefig(dst, dpi=120)
    print(dst)


if __name__ == "__main__":
    main()
