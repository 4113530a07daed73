"""Mean deviation bound for a qubit environment as the energy spread sigma grows."""
import numpy as np

from _common import run
from thermobj.experiments import linear_fit_r2


def describe(table):
    for row in table.rows:
        print(f"sigma={row.grid_value:<6g} mean={row.mean:.5f} +- {row.stderr:.5f}")
    x = [r.grid_value for r in table.rows]
    print(f"strictly increasing: {bool(np.all(np.diff(table.means()) > 0))}, "
          f"linear fit R^2 = {linear_fit_r2(x, table.means()):.4f}")


if __name__ == "__main__":
    run("sigma_sweep.txt", describe)
