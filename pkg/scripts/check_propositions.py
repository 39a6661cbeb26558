#!/usr/bin/env python3
"""Numerical checks of the linearization-error analysis.

Prints, for a grid of (phi, sigma_xi/T_s, W T_s):

* the closed-form ratio var(xi^2 x'') / var(xi x') and its Monte Carlo estimate;
* the quadrature value of var(D(xi x')) and its Monte Carlo estimate (dB gap).
"""

import argparse
import math

from dejitter_lab.analysis import (
    prop1_monte_carlo,
    prop1_ratio,
    prop2_monte_carlo,
    prop2_variance,
)
from dejitter_lab.jitter import Ar1Params, sigma_eps_for_percentage


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--trials", type=int, default=64)
    ap.add_argument("--n", type=int, default=2**16)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    t_s = 1e-8
    print(f"{'phi':>6} {'sxi/Ts':>7} {'WTs':>4} | {'ratio':>9} {'ratio MC':>9} | "
          f"{'var D(xi x`)':>13} {'MC - quad':>9}")
    for phi in (0.95, 0.999):
        for pct in (0.005, 0.015):
            for wts in (0.3, 0.4):
                p = Ar1Params(phi, sigma_eps_for_percentage(pct, phi, t_s))
                w = wts / t_s
                r = prop1_ratio(p, w)
                r_mc = prop1_monte_carlo(p, w, t_s, args.n, args.trials, args.seed)
                v = prop2_variance(p, w, t_s)
                v_mc = prop2_monte_carlo(p, w, t_s, args.n, args.trials, args.seed)
                print(f"{phi:6.3f} {pct:7.3f} {wts:4.1f} | {r:9.2e} {r_mc:9.2e} | "
                      f"{v:13.4e} {10 * math.log10(v_mc / v):+8.3f} dB")


if __name__ == "__main__":
    main()
