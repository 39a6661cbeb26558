"""Command line entry point ``dejitter-lab``.

Subcommands::

    dejitter-lab run CONFIG [--set key=value ...] [flags]
    dejitter-lab estimate MEASUREMENTS.csv [--k-gap K] [--starts N]
    dejitter-lab psd SIGNAL.bin [--segment L] [--out FILE]

Exit status is 2 for configuration or input errors and 0 otherwise; failing
trials are recorded in the result tables instead.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io
from .config import ConfigError, load_config
from .experiments import run, write_result
from .metrics import psd_welch
from .mle import LikelihoodDegenerateError, MleProblem, estimate_parameters

EXIT_CONFIG = 2

# flag name -> config key
_FLAG_KEYS = {
    "trials": "trials",
    "seed": "seed",
    "workers": "workers",
    "poly_degree": "poly_degree",
    "poly_block": "poly_block",
    "ridge": "ridge",
    "kf_phi": "kf_phi",
    "kf_sigma_eps": "kf_sigma_eps",
    "kf_sigma_w": "kf_sigma_w",
    "out": "out_dir",
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dejitter-lab",
                                description="Pilot-assisted ADC clock-jitter compensation.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key (repeatable)")
    r.add_argument("--out", help="output directory")
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--workers", type=int)
    r.add_argument("--poly-degree", type=int)
    r.add_argument("--poly-block", type=int)
    r.add_argument("--ridge", type=float)
    r.add_argument("--kf-phi", type=float)
    r.add_argument("--kf-sigma-eps", type=float)
    r.add_argument("--kf-sigma-w", type=float)
    mode = r.add_mutually_exclusive_group()
    mode.add_argument("--kf-oracle", action="store_true", help="Kalman with the true parameters")
    mode.add_argument("--kf-mle", action="store_true", help="Kalman with per-record MLE")

    e = sub.add_parser("estimate", help="maximum-likelihood jitter/noise parameters")
    e.add_argument("measurements")
    e.add_argument("--k-gap", type=int, help="nominal data samples between pilots")
    e.add_argument("--starts", type=int, default=32)
    e.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("psd", help="Welch spectrum of a binary signal record")
    s.add_argument("signal")
    s.add_argument("--segment", type=int, default=4096)
    s.add_argument("--overlap", type=float, default=0.5)
    s.add_argument("--out", help="CSV path (default: stdout)")
    return p


def _overrides(args) -> dict:
    ov = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        ov[k.strip()] = v
    for flag, key in _FLAG_KEYS.items():
        val = getattr(args, flag, None)
        if val is not None:
            ov[key] = val
    if any(getattr(args, f) is not None for f in ("kf_phi", "kf_sigma_eps", "kf_sigma_w")):
        ov["kalman_mode"] = "fixed"
    if args.kf_oracle:
        ov["kalman_mode"] = "oracle"
    if args.kf_mle:
        ov["kalman_mode"] = "mle"
    return ov


def _cmd_run(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    result = run(cfg)
    paths = write_result(result, cfg.out_dir)
    n_err = getattr(result, "n_errors", 0)
    for p in paths:
        print(p)
    if n_err:
        print(f"{n_err} trial(s) failed; see the error column", file=sys.stderr)
    return 0


def _cmd_estimate(args) -> int:
    try:
        idx, m, d, rel = io.read_measurements_csv(args.measurements)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read measurements: {exc}") from None
    keep = rel & (d > 0)
    idx, m, d = idx[keep], m[keep], d[keep]
    if idx.size < 3:
        raise ConfigError("need at least 3 usable pilots")
    lags = np.diff(idx).astype(float)
    k_gap = args.k_gap if args.k_gap is not None else int(np.median(lags)) - 1
    prob = MleProblem(m, d, k_gap, starts=args.starts, lags=lags)
    out = {"M": int(idx.size), "k_gap": k_gap}
    try:
        res = estimate_parameters(prob, seed=args.seed)
    except LikelihoodDegenerateError as exc:
        out["error"] = str(exc)
    else:
        th = res.theta_hat
        out.update(phi=th.phi, sigma_eps=th.sigma_eps, sigma_w=th.sigma_w,
                   sigma_xi=th.sigma_xi, neg_loglik=res.neg_loglik,
                   starts=res.starts_tried, converged=int(sum(res.converged_flags)))
    print(json.dumps(out, indent=2))
    return 0


def _cmd_psd(args) -> int:
    try:
        sig = io.read_signal_bin(args.signal)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read signal: {exc}") from None
    if args.segment < 8 or not 0 <= args.overlap < 1:
        raise ConfigError("segment must be >= 8 and overlap in [0, 1)")
    f, p = psd_welch(sig, args.segment, args.overlap)
    if args.out:
        io.write_psd_csv(args.out, {"signal": (f, p)})
    else:
        print("stage,freq_hz,psd")
        for fi, pi in zip(f, p):
            print(f"signal,{float(fi)!r},{float(pi)!r}")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handler = {"run": _cmd_run, "estimate": _cmd_estimate, "psd": _cmd_psd}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"dejitter-lab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
