"""Dirichlet and Neumann trace errors of the extension along the y ladder.

Prints the error table and fitted log-log slopes for each exponent, together
with the leading-order prediction for the Dirichlet error of the slowest mode.
"""
import argparse
import math

import numpy as np
from scipy import special

from lamefrac.config import default_config
from lamefrac.extension import dirichlet_trace_error, fit_loglog_slope, neumann_trace_error
from lamefrac.grid import band_limited_random


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--s", type=float, nargs="+", default=[0.3, 0.5, 0.75])
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--fit-from", type=int, default=6)
    args = ap.parse_args()
    cfg = default_config()
    p = cfg.params()
    grid = cfg.space_time_grid()
    u = band_limited_random(grid, grid.n, np.random.default_rng(args.seed), kmax=1, mmax=1)
    y = cfg.y_ladder.values()
    j = args.fit_from
    for s in args.s:
        d = dirichlet_trace_error(p, u, s, y)
        nm = neumann_trace_error(p, u, s, y)
        print(f"s = {s:g}")
        print("       y        dirichlet        neumann")
        for yy, a, b in zip(y, d, nm):
            print(f"  {yy:10.3e}  {a:14.6e}  {b:14.6e}")
        print(f"  slopes: dirichlet {fit_loglog_slope(y[j:], d[j:]):.4f} (2s = {2 * s:g}), "
              f"neumann {fit_loglog_slope(y[j:], nm[j:]):.4f} (2-2s = {2 - 2 * s:g})")
        lead = special.gamma(1 - s) / special.gamma(1 + s) * (math.sqrt(2) * 1e-3 / 2) ** (2 * s)
        print(f"  leading-order Dirichlet error at y=1e-3 for |L|^2 = 2: {lead:.4e}\n")


if __name__ == "__main__":
    main()
