"""Mean macrofraction bound against the number N_E of grouped subenvironments.

The three formula variants are reported side by side; only grouped_greedy is
expected to decrease with N_E.
"""
import numpy as np

from _common import run


def describe(table):
    for v in table.config.variants:
        means = table.means(v)
        trend = "decreasing" if np.all(np.diff(means) < 0) else "not decreasing"
        print(f"{v:>15}: " + " ".join(f"{m:.4g}" for m in means) + f"  ({trend})")


if __name__ == "__main__":
    run("macrofraction_sweep.txt", describe)
