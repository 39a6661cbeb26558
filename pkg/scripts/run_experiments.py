#!/usr/bin/env python3
"""Run experiment configs and print a per-point summary table.

    python3 scripts/run_experiments.py configs/density_sweep.ini configs/ndr_sweep.ini
    python3 scripts/run_experiments.py configs/*.ini --trials 2 --n 16384

Results go to each config's ``out_dir`` (or ``--out/<scenario>``).
"""

import argparse
import logging
import time
from pathlib import Path

from dejitter_lab.config import load_config
from dejitter_lab.experiments import SpectraSet, run, write_result

log = logging.getLogger("run_experiments")


def print_summary(result) -> None:
    if isinstance(result, SpectraSet):
        for row in result.band_powers:
            print(f"  {row['stage']:<32} {row['band']:<11} {row['power_db']:8.2f} dB")
        return
    metrics = [m for m in ("sinadr_uncomp", "sinadr_poly", "sinadr_kalman", "sinadr_kalmanmle",
                           "delta_evm_poly", "delta_evm_kalman")
               if any(s["metric"] == m for s in result.summary)]
    print("  " + f"{'point':>10} " + " ".join(f"{m:>17}" for m in metrics))
    for pi in sorted({s["point_index"] for s in result.summary}):
        point = next(s["point"] for s in result.summary if s["point_index"] == pi)
        cells = []
        for m in metrics:
            try:
                cells.append(f"{result.mean(m, pi):17.2f}")
            except KeyError:
                cells.append(f"{'-':>17}")
        print(f"  {point:>10g} " + " ".join(cells))
    if result.n_errors:
        print(f"  ({result.n_errors} failed trials, see results.csv)")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawTextHelpFormatter)
    ap.add_argument("configs", nargs="+", type=Path)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--n", type=int, help="record length override")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--out", type=Path, help="parent directory for all outputs")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    for path in args.configs:
        overrides = {k: v for k, v in (("trials", args.trials), ("n", args.n),
                                       ("workers", args.workers)) if v is not None}
        cfg = load_config(path, overrides)
        if args.out is not None:
            cfg = cfg.replace(out_dir=str(args.out / cfg.scenario))
        t0 = time.perf_counter()
        result = run(cfg)
        write_result(result, cfg.out_dir)
        log.info("%s: %s in %.1f s -> %s", path.name, cfg.scenario, time.perf_counter() - t0,
                 cfg.out_dir)
        print_summary(result)


if __name__ == "__main__":
    main()
