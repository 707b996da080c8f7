"""Decay of the weighted Neumann derivative of the W-transform.

Compares a trace with a nonzero frequency against a constant trace, for each
exponent s >= 1/2, and reports the fitted slope of ``sup |y^a d_y W|``.
"""
import argparse

import numpy as np

from lamefrac.config import default_config
from lamefrac.reduction import neumann_coupled_field, neumann_decay


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--s", type=float, nargs="+", default=[0.5, 0.6, 0.75, 0.9])
    args = ap.parse_args()
    cfg = default_config()
    p, V = cfg.params(), cfg.potential_spec()
    m = cfg.mode
    rng = np.random.default_rng(3)
    x = rng.uniform(0, 2 * np.pi, (60, 2))
    t = rng.uniform(0, 2 * np.pi, 60)
    ladder = cfg.y_ladder.values()[cfg.y_ladder.fit_from:]
    g = np.concatenate([m.vector(), [1.0]])
    print("     s   slope(mode)  slope(constant)     2s")
    for s in args.s:
        if s < 0.5:
            print(f"  {s:4.2f}  skipped (needs s >= 1/2)")
            continue
        _, gen = neumann_decay(neumann_coupled_field(p, V, s, m.k, m.sigma, g), V, s, x, t,
                               ladder)
        _, const = neumann_decay(neumann_coupled_field(p, V, s, np.zeros(2), 0.0, g), V, s,
                                 x, t, ladder)
        print(f"  {s:4.2f}  {gen:11.4f}  {const:15.4f}  {2 * s:5.2f}")


if __name__ == "__main__":
    main()
