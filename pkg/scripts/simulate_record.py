#!/usr/bin/env python3
"""Simulate one jittered record and write the files the CLI consumes.

Writes ``signal.bin`` (the observation), ``measurements.csv`` (pilot
pseudo-measurements), ``jitter.csv`` (true jitter) and ``pilots.csv`` into
``--out``. Afterwards, for example::

    dejitter-lab estimate OUT/measurements.csv
    dejitter-lab psd OUT/signal.bin --out OUT/psd.csv
"""

import argparse
from pathlib import Path

from dejitter_lab import io
from dejitter_lab.jitter import Ar1Params, ar1_generate, make_observation, sigma_eps_for_percentage
from dejitter_lab.metrics import sigma_w_for_ndr
from dejitter_lab.pilots import build_schedule, k_gap_for_density, pseudo_measure
from dejitter_lab.signals import bandlimited_derivative, generate_bandlimited_gaussian


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=Path, default=Path("record"))
    ap.add_argument("--n", type=int, default=2**16)
    ap.add_argument("--t-s", type=float, default=1e-8)
    ap.add_argument("--w", type=float, default=4e7)
    ap.add_argument("--phi", type=float, default=0.999)
    ap.add_argument("--jitter-ratio", type=float, default=0.015, help="sigma_xi / T_s")
    ap.add_argument("--ndr-db", type=float, default=-10.0)
    ap.add_argument("--density", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    sigma_eps = sigma_eps_for_percentage(args.jitter_ratio, args.phi, args.t_s)
    sigma_xi = Ar1Params(args.phi, sigma_eps).sigma_xi
    sigma_w = sigma_w_for_ndr(args.ndr_db, sigma_xi, 1.0, args.w)
    params = Ar1Params(args.phi, sigma_eps, sigma_w)

    x = generate_bandlimited_gaussian(args.n, args.t_s, args.w, 1.0, seed=args.seed)
    trace = ar1_generate(params, args.n, seed=args.seed + 1, t_s=args.t_s)
    y = make_observation(x, trace, sigma_w, "exact", seed=args.seed + 2)
    sched = build_schedule(args.n, k_gap_for_density(args.density))
    meas = pseudo_measure(y, bandlimited_derivative(y), x.samples, sched)

    io.write_signal_bin(args.out / "signal.bin", y)
    io.write_measurements_csv(args.out / "measurements.csv", meas)
    io.write_jitter_csv(args.out / "jitter.csv", trace)
    io.write_schedule_csv(args.out / "pilots.csv", sched)
    print(f"true parameters: phi={params.phi} sigma_eps={params.sigma_eps:.4e} "
          f"sigma_w={params.sigma_w:.4e}")
    print(f"{sched.indices.size} pilots, {meas.n_flagged} flagged, files in {args.out}")


if __name__ == "__main__":
    main()
