"""Batch experiments: sweeps, the symbol (EVM) pipeline and staged spectra.

Every trial draws its randomness from ``numpy.random.SeedSequence`` keyed by
the master seed and a fixed counter tuple, so any single point can be re-run
on its own and the result does not depend on execution order or worker
count. With ``common_random_numbers`` (the default) the signal, jitter and
noise of trial ``t`` are shared by all sweep points, which makes
point-to-point differences far less noisy; estimator randomness (MLE
starts) is always keyed by ``(point, trial)``.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from . import io
from .config import ExperimentConfig, to_ini
from .jitter import Ar1Params, ar1_generate, make_observation, sigma_eps_for_percentage
from .kalman import dejitter_kalman
from .metrics import (
    band_power,
    db10,
    delta_evm,
    evm,
    ls_scale,
    psd_welch,
    sigma_w_for_ndr,
    sigma_w_for_sinadr,
    sinadr_empirical,
)
from .mle import MleProblem, estimate_parameters
from .pilots import build_schedule, k_gap_for_density, pseudo_measure
from .poly import PolyConfig, dejitter_poly
from .signals import (
    DerivativeFilterSpec,
    SampledSignal,
    bandlimited_derivative,
    generate_bandlimited_gaussian,
    gerchberg_papoulis_fill,
)

__all__ = [
    "ExperimentResult",
    "SpectraSet",
    "run_scenario",
    "run_evm_pipeline",
    "run_psd_stages",
    "run",
    "summarize",
    "write_result",
    "trial_seed",
]

TIMING_COLUMNS = ("t_poly_s", "t_kalman_s", "t_mle_s")
KEY_COLUMNS = ("scenario", "point_index", "point", "trial", "seed")
_SUMMARY_PREFIXES = ("sinadr_", "evm_", "delta_evm_", "xi_rmse_", "phi_hat", "sigma_eps_hat",
                     "sigma_w_hat", "sigma_w")


@dataclass
class ExperimentResult:
    """Raw per-trial rows plus per-point aggregates (``mean, std, min, max``)."""

    scenario: str
    rows: list
    summary: list
    config: ExperimentConfig | None = None

    @property
    def n_errors(self) -> int:
        return sum(1 for r in self.rows if r.get("error"))

    def column(self, name: str, point_index: int | None = None) -> np.ndarray:
        sel = [r for r in self.rows if point_index is None or r["point_index"] == point_index]
        return np.array([r.get(name, math.nan) for r in sel], dtype=float)

    def mean(self, name: str, point_index: int) -> float:
        for s in self.summary:
            if s["point_index"] == point_index and s["metric"] == name:
                return s["mean"]
        raise KeyError(name)

    def metric_table(self) -> list[dict]:
        """Long table ``point, stage, seed, metric, value_db``."""
        out = []
        for r in self.rows:
            if r.get("error"):
                continue
            for key, val in r.items():
                if key.startswith("sinadr_") or key.startswith("delta_evm_"):
                    metric, stage = key.rsplit("_", 1)
                    v = val
                elif key.startswith("evm_"):
                    metric, stage = "evm", key[4:]
                    v = 20.0 * math.log10(val) if val > 0 else -math.inf
                else:
                    continue
                out.append({"point": r["point"], "stage": stage, "seed": r["seed"],
                            "metric": metric, "value_db": v})
        return out


@dataclass
class SpectraSet:
    """Per-stage Welch spectra with band powers of the composite test."""

    spectra: dict
    band_powers: list = field(default_factory=list)
    config: ExperimentConfig | None = None
    gap_fill_converged: dict = field(default_factory=dict)

    def band_db(self, stage: str, band: str) -> float:
        for r in self.band_powers:
            if r["stage"] == stage and r["band"] == band:
                return r["power_db"]
        raise KeyError((stage, band))


# ----------------------------------------------------------------------------- seeds

def _seed_sequences(cfg: ExperimentConfig, point_index: int, trial: int):
    key = (trial,) if cfg.common_random_numbers else (point_index, trial)
    data = np.random.SeedSequence(cfg.seed, spawn_key=key)
    algo = np.random.SeedSequence(cfg.seed, spawn_key=(1 << 20, point_index, trial))
    sig, jit, noise = data.spawn(3)
    return sig, jit, noise, algo


def trial_seed(cfg: ExperimentConfig, point_index: int, trial: int) -> int:
    """Integer label of the data stream a trial used (reported as ``seed``)."""
    key = (trial,) if cfg.common_random_numbers else (point_index, trial)
    return int(np.random.SeedSequence(cfg.seed, spawn_key=key).generate_state(1)[0])


# ----------------------------------------------------------------------------- points

def _points(cfg: ExperimentConfig) -> list[float]:
    return list(cfg.values) if cfg.values else [math.nan]


def _sigma_eps(cfg, ratio=None, t_s=None) -> float:
    t_s = cfg.t_s if t_s is None else t_s
    if ratio is None and cfg.sigma_eps is not None:
        return float(cfg.sigma_eps)
    ratio = cfg.jitter_ratio if ratio is None else ratio
    return float(sigma_eps_for_percentage(ratio, cfg.phi, t_s))


def _noise_std(cfg, sigma_xi, sx2, w, ndr=None) -> float:
    if ndr is not None:
        return sigma_w_for_ndr(ndr, sigma_xi, sx2, w)
    if cfg.sigma_w is not None:
        return float(cfg.sigma_w)
    if cfg.ndr_db is not None:
        return sigma_w_for_ndr(cfg.ndr_db, sigma_xi, sx2, w)
    return sigma_w_for_sinadr(cfg.sinadr_db, sigma_xi, sx2, w)


def _k_gap(cfg, density=None) -> int:
    if density is not None:
        return k_gap_for_density(density)
    if cfg.k_gap is not None:
        return int(cfg.k_gap)
    return k_gap_for_density(cfg.density)


def point_setup(cfg: ExperimentConfig, value: float) -> dict:
    """Resolve W, jitter, noise and pilot gap for one sweep value."""
    sc = cfg.scenario
    w = value if sc == "bandwidth_sweep" else cfg.w
    ratio = value if sc == "jitter_sweep" else None
    sigma_eps = _sigma_eps(cfg, ratio)
    sigma_xi = sigma_eps / math.sqrt((1.0 - cfg.phi) * (1.0 + cfg.phi))
    if sc == "ndr_sweep":
        sigma_w = _noise_std(cfg, sigma_xi, cfg.sigma_x2, w, ndr=value)
    elif sc == "jitter_sweep":
        # noise fixed by its value at the smallest jitter level
        ref = _sigma_eps(cfg, min(cfg.values)) / math.sqrt((1.0 - cfg.phi) * (1.0 + cfg.phi))
        sigma_w = _noise_std(cfg, ref, cfg.sigma_x2, w)
    elif sc == "bandwidth_sweep" and cfg.bandwidth_hold == "noise":
        sigma_w = _noise_std(cfg, sigma_xi, cfg.sigma_x2, cfg.values[0])
    else:
        sigma_w = _noise_std(cfg, sigma_xi, cfg.sigma_x2, w)
    density = value if sc in ("density_sweep", "mle_vs_oracle") else None
    return {"w": float(w), "sigma_eps": sigma_eps, "sigma_w": float(sigma_w),
            "k_gap": _k_gap(cfg, density)}


def _kalman_params(cfg, truth: Ar1Params):
    if cfg.kalman_mode == "fixed":
        return SimpleNamespace(phi=cfg.kf_phi, sigma_eps=cfg.kf_sigma_eps, sigma_w=cfg.kf_sigma_w)
    return truth


# ----------------------------------------------------------------------------- trials

def _signal_trial(cfg: ExperimentConfig, point_index: int, value: float, trial: int) -> dict:
    s_sig, s_jit, s_noise, s_algo = _seed_sequences(cfg, point_index, trial)
    pt = point_setup(cfg, value)
    dspec = DerivativeFilterSpec(cfg.deriv_half_length, cfg.deriv_window)
    x = generate_bandlimited_gaussian(cfg.n, cfg.t_s, pt["w"], cfg.sigma_x2, s_sig, cfg.is_real)
    truth = Ar1Params(cfg.phi, pt["sigma_eps"], pt["sigma_w"])
    trace = ar1_generate(truth, cfg.n, s_jit, cfg.t_s)
    y = make_observation(x, trace, pt["sigma_w"], cfg.obs_mode, s_noise, cfg.half_width, dspec)
    yp = bandlimited_derivative(y, dspec)
    sched = build_schedule(cfg.n, pt["k_gap"], cfg.poly_block)
    meas = pseudo_measure(y, yp, x.samples, sched)
    row = {"sigma_w": pt["sigma_w"], "k_gap": pt["k_gap"], "clamped": trace.clamped,
           "sinadr_uncomp": sinadr_empirical(x, y, cfg.guard)}
    xi = trace.xi
    g = cfg.guard

    def rmse(est):
        return float(np.sqrt(np.mean((est[g:-g] - xi[g:-g]) ** 2)) / cfg.t_s)

    if cfg.poly:
        t0 = time.perf_counter()
        out = dejitter_poly(y, yp, x.samples, sched,
                            PolyConfig(cfg.poly_degree, cfg.poly_block, cfg.ridge), meas)
        row["t_poly_s"] = time.perf_counter() - t0
        row["sinadr_poly"] = sinadr_empirical(x, out.x_hat, g)
        row["xi_rmse_poly"] = rmse(out.xi_hat.xi)
    if cfg.kalman:
        use_mle = cfg.kalman_mode == "mle" or cfg.scenario == "mle_vs_oracle"
        if cfg.scenario == "mle_vs_oracle" or cfg.kalman_mode != "mle":
            t0 = time.perf_counter()
            sm = dejitter_kalman(y, yp, x.samples, sched, _kalman_params(cfg, truth))
            row["t_kalman_s"] = time.perf_counter() - t0
            row["sinadr_kalman"] = sinadr_empirical(x, sm.x_hat, g)
            row["xi_rmse_kalman"] = rmse(sm.xi_smooth.xi)
        if use_mle:
            t0 = time.perf_counter()
            prob = MleProblem.from_measurements(meas, pt["k_gap"], starts=cfg.mle_starts)
            fit = estimate_parameters(prob, seed=np.random.default_rng(s_algo))
            row["t_mle_s"] = time.perf_counter() - t0
            th = fit.theta_hat
            row.update(phi_hat=th.phi, sigma_eps_hat=th.sigma_eps, sigma_w_hat=th.sigma_w)
            sm = dejitter_kalman(y, yp, x.samples, sched, th)
            name = "kalmanmle" if cfg.scenario == "mle_vs_oracle" else "kalman"
            row[f"sinadr_{name}"] = sinadr_empirical(x, sm.x_hat, g)
            row[f"xi_rmse_{name}"] = rmse(sm.xi_smooth.xi)
    return row


def pulse(u, half_width: int):
    """Hann-windowed sinc pulse in symbol units, zero beyond ``half_width``."""
    u = np.asarray(u, dtype=float)
    win = np.where(np.abs(u) < half_width, 0.5 * (1.0 + np.cos(np.pi * u / half_width)), 0.0)
    return np.sinc(u) * win


def shaped_waveform(symbols, osr: int, half_width: int, delta=None) -> np.ndarray:
    """Pulse-shaped waveform sampled at ``n + delta_n`` (sample units).

    The waveform is evaluated analytically, so jittered instants need no
    resampling step. At ``n = osr * i`` with ``delta = 0`` it equals
    ``symbols[i]`` exactly.
    """
    ns = symbols.size
    n = ns * osr
    t = np.arange(n, dtype=float)
    if delta is not None:
        t = t + delta
    u0 = t / osr
    base = np.floor(u0).astype(int)
    out = np.zeros(n, dtype=symbols.dtype)
    for j in range(-half_width - 1, half_width + 2):
        i = base + j
        ok = (i >= 0) & (i < ns)
        out[ok] += symbols[i[ok]] * pulse(u0[ok] - i[ok], half_width)
    return out


def receive_filter_symbols(z, osr: int, half_width: int, n_symbols: int) -> np.ndarray:
    """Low-pass receive filter, then keep the symbol-synchronous samples.

    The filter is a Hann-windowed sinc with cutoff ``0.75`` times the symbol
    rate, flat across the whole transmit pulse band, so the cascade stays
    Nyquist and the decimated clean waveform returns the symbols. Filtering
    with the transmit pulse itself would square a zero-rolloff spectrum and
    leave an intersymbol-interference floor of several percent.
    """
    cut = 0.75 / osr  # cycles per sample
    m = half_width * osr
    k = np.arange(-m, m + 1)
    taps = 2.0 * cut * np.sinc(2.0 * cut * k) * 0.5 * (1.0 + np.cos(np.pi * k / m))
    full = np.convolve(z, taps)  # index shift = m
    return full[m: m + n_symbols * osr: osr]


def _evm_trial(cfg: ExperimentConfig, point_index: int, value: float, trial: int) -> dict:
    s_sig, s_jit, s_noise, s_algo = _seed_sequences(cfg, point_index, trial)
    osr = int(cfg.oversampling)
    t_s = 1.0 / (osr * cfg.symbol_rate)
    w = cfg.symbol_rate / 2.0
    ns = cfg.n_symbols
    n = ns * osr
    rs = np.random.default_rng(s_sig)
    if cfg.is_real:
        sym = rs.standard_normal(ns)
    else:
        sym = (rs.standard_normal(ns) + 1j * rs.standard_normal(ns)) / math.sqrt(2.0)
    x_samples = shaped_waveform(sym, osr, cfg.pulse_half_width)
    sx2 = float(np.mean(np.abs(x_samples) ** 2))
    sigma_eps = _sigma_eps(cfg, t_s=t_s)
    truth0 = Ar1Params(cfg.phi, sigma_eps)
    sigma_w = _noise_std(cfg, truth0.sigma_xi, sx2, w)
    truth = Ar1Params(cfg.phi, sigma_eps, sigma_w)
    trace = ar1_generate(truth, n, s_jit, t_s)
    z = shaped_waveform(sym, osr, cfg.pulse_half_width, trace.xi / t_s)
    if sigma_w > 0:
        rn = np.random.default_rng(s_noise)
        if cfg.is_real:
            z = z + sigma_w * rn.standard_normal(n)
        else:
            z = z + sigma_w * (rn.standard_normal(n) + 1j * rn.standard_normal(n)) / math.sqrt(2.0)
    x = SampledSignal(x_samples, t_s, w, cfg.is_real)
    y = x.with_samples(z)
    dspec = DerivativeFilterSpec(cfg.deriv_half_length, cfg.deriv_window)
    yp = bandlimited_derivative(y, dspec)
    sym_gap = (round(1.0 / value) - 1) if not math.isnan(value) else \
        (cfg.k_gap if cfg.k_gap is not None else round(1.0 / cfg.density) - 1)
    k_gap = osr * (sym_gap + 1) - 1
    sched = build_schedule(n, k_gap, cfg.poly_block)
    meas = pseudo_measure(y, yp, x_samples, sched)

    edge = cfg.pulse_half_width + int(math.ceil(cfg.guard / osr))
    sel = slice(edge, ns - edge)

    def symbol_evm(samples):
        r = receive_filter_symbols(samples, osr, cfg.pulse_half_width, ns)[sel]
        return evm(sym[sel], ls_scale(sym[sel], r) * r)

    e_unc = symbol_evm(z)
    row = {"sigma_w": sigma_w, "k_gap": k_gap, "evm_clean": symbol_evm(x_samples),
           "evm_uncomp": e_unc, "sinadr_uncomp": sinadr_empirical(x, y, cfg.guard)}
    if cfg.poly:
        t0 = time.perf_counter()
        out = dejitter_poly(y, yp, x_samples, sched,
                            PolyConfig(cfg.poly_degree, cfg.poly_block, cfg.ridge), meas)
        row["t_poly_s"] = time.perf_counter() - t0
        row["evm_poly"] = symbol_evm(out.x_hat.samples)
        row["delta_evm_poly"] = delta_evm(e_unc, row["evm_poly"])
        row["sinadr_poly"] = sinadr_empirical(x, out.x_hat, cfg.guard)
    if cfg.kalman:
        t0 = time.perf_counter()
        if cfg.kalman_mode == "mle":
            prob = MleProblem.from_measurements(meas, k_gap, starts=cfg.mle_starts)
            params = estimate_parameters(prob, seed=np.random.default_rng(s_algo)).theta_hat
        else:
            params = _kalman_params(cfg, truth)
        sm = dejitter_kalman(y, yp, x_samples, sched, params)
        row["t_kalman_s"] = time.perf_counter() - t0
        row["evm_kalman"] = symbol_evm(sm.x_hat.samples)
        row["delta_evm_kalman"] = delta_evm(e_unc, row["evm_kalman"])
        row["sinadr_kalman"] = sinadr_empirical(x, sm.x_hat, cfg.guard)
    return row


def _run_task(args) -> dict:
    cfg, point_index, value, trial = args
    row = {"scenario": cfg.scenario, "point_index": point_index, "point": value, "trial": trial,
           "seed": trial_seed(cfg, point_index, trial)}
    fn = _evm_trial if cfg.scenario == "evm_pipeline" else _signal_trial
    try:
        row.update(fn(cfg, point_index, value, trial))
        row["error"] = ""
    except Exception as exc:  # recorded, the sweep goes on
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def summarize(rows: list[dict]) -> list[dict]:
    """Per point and metric: ``mean, std, min, max, count`` over error-free trials."""
    out = []
    points = sorted({(r["point_index"], r["point"]) for r in rows}, key=lambda p: p[0])
    for pi, pv in points:
        good = [r for r in rows if r["point_index"] == pi and not r.get("error")]
        names = []
        for r in good:
            for k in r:
                if k.startswith(_SUMMARY_PREFIXES) and k not in names:
                    names.append(k)
        for name in names:
            vals = np.array([r[name] for r in good if name in r], dtype=float)
            out.append({"point_index": pi, "point": pv, "metric": name,
                        "mean": float(np.mean(vals)),
                        "std": float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0,
                        "min": float(np.min(vals)), "max": float(np.max(vals)),
                        "count": int(vals.size)})
    return out


def _execute(cfg: ExperimentConfig) -> ExperimentResult:
    tasks = [(cfg, pi, v, t) for pi, v in enumerate(_points(cfg)) for t in range(cfg.trials)]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_run_task, tasks))
    else:
        rows = [_run_task(t) for t in tasks]
    rows.sort(key=lambda r: (r["point_index"], r["trial"]))
    return ExperimentResult(cfg.scenario, rows, summarize(rows), cfg)


def run_scenario(cfg: ExperimentConfig) -> ExperimentResult:
    """Run a sweep scenario: ``points x trials`` rows plus the per-point summary."""
    if cfg.scenario in ("evm_pipeline", "psd_stages"):
        raise ValueError(f"use the dedicated runner for {cfg.scenario}")
    return _execute(cfg)


def run_evm_pipeline(cfg: ExperimentConfig) -> ExperimentResult:
    """Symbols, pulse shaping, impairments, both compensators, then EVM.

    Sweep values are pilot-symbol densities; pilot samples sit on the
    symbol-synchronous instants, where the clean waveform equals the symbol.
    """
    if cfg.scenario != "evm_pipeline":
        cfg = cfg.replace(scenario="evm_pipeline")
    osr = cfg.oversampling
    if not float(osr).is_integer():
        raise ValueError(f"oversampling must be an integer, got {osr}")
    return _execute(cfg)


# ----------------------------------------------------------------------------- spectra

def _bandpass_noise(n, lo, hi, power, rng):
    white = rng.standard_normal(n)
    spec = np.fft.fft(white)
    f = np.abs(np.fft.fftfreq(n))
    spec[(f < lo) | (f > hi)] = 0.0
    z = np.fft.ifft(spec).real
    return z * math.sqrt(power / np.mean(z**2))


def run_psd_stages(cfg: ExperimentConfig) -> SpectraSet:
    """Spectra of a composite signal (desired ``x`` plus strong interferer ``zeta``).

    Stages: ``clean`` (x + zeta), ``jittered``, ``dejittered_<alg>``,
    ``gap_filled_<alg>`` (pilot samples re-estimated by band-limited
    extrapolation), ``interference_removed_<alg>`` and
    ``interference_removed_uncomp`` (oracle subtraction of zeta), and
    ``desired`` (x alone). The pilots know the clean composite.
    Band powers are integrated over the desired band, the gap between the
    desired and interferer bands, and the interferer band. With slowly
    varying jitter the skirt ``xi * zeta'`` stays close to the interferer,
    so after interference removal the interferer band holds the residual
    skirt.
    """
    s_sig, s_jit, s_noise, _ = _seed_sequences(cfg, 0, 0)
    rng = np.random.default_rng(s_sig)
    n, t_s = cfg.n, cfg.t_s
    w_total = cfg.interferer_hi / t_s
    x = generate_bandlimited_gaussian(n, t_s, cfg.signal_w / t_s, cfg.sigma_x2, rng, cfg.is_real)
    zeta = _bandpass_noise(n, cfg.interferer_lo, cfg.interferer_hi,
                           cfg.sigma_x2 * 10.0 ** (cfg.interferer_db / 10.0), rng)
    comp = SampledSignal(x.samples + zeta, t_s, w_total, True)
    dspec = DerivativeFilterSpec(cfg.deriv_half_length, cfg.deriv_window)
    sigma_eps = _sigma_eps(cfg)
    sigma_xi = sigma_eps / math.sqrt((1.0 - cfg.phi) * (1.0 + cfg.phi))
    sc2 = float(np.mean(comp.samples**2))
    dvar = float(np.mean(bandlimited_derivative(comp, dspec).samples ** 2))
    if cfg.sigma_w is not None:
        sigma_w = cfg.sigma_w
    elif cfg.ndr_db is not None:
        sigma_w = math.sqrt(10 ** (cfg.ndr_db / 10) * sigma_xi**2 * dvar)
    else:
        sigma_w = sigma_w_for_sinadr(cfg.sinadr_db, sigma_xi, sc2, w_total)
    truth = Ar1Params(cfg.phi, sigma_eps, sigma_w)
    trace = ar1_generate(truth, n, s_jit, t_s)
    z = make_observation(comp, trace, sigma_w, cfg.obs_mode, s_noise, cfg.half_width, dspec)
    zp = bandlimited_derivative(z, dspec)
    sched = build_schedule(n, _k_gap(cfg), cfg.poly_block)
    meas = pseudo_measure(z, zp, comp.samples, sched)
    known = ~sched.mask()

    stages = {"desired": x.samples, "clean": comp.samples, "jittered": z.samples,
              "interference_removed_uncomp": z.samples - zeta}
    algs = {}
    if cfg.poly:
        algs["poly"] = dejitter_poly(z, zp, comp.samples, sched,
                                     PolyConfig(cfg.poly_degree, cfg.poly_block, cfg.ridge),
                                     meas).x_hat
    if cfg.kalman:
        algs["kalman"] = dejitter_kalman(z, zp, comp.samples, sched,
                                         _kalman_params(cfg, truth)).x_hat
    converged = {}
    for name, xh in algs.items():
        filled, hist = gerchberg_papoulis_fill(xh, known, cfg.gap_fill_iterations,
                                               return_history=True, warn=False)
        converged[name] = hist.converged
        stages[f"dejittered_{name}"] = xh.samples
        # keep the data samples, take the projection only at the pilots
        gap_filled = np.where(known, xh.samples, filled.samples)
        stages[f"gap_filled_{name}"] = gap_filled
        stages[f"interference_removed_{name}"] = gap_filled - zeta

    spectra = {}
    bands = {"desired": (0.0, cfg.signal_w), "gap": (cfg.signal_w * 1.2, cfg.interferer_lo * 0.9),
             "interferer": (cfg.interferer_lo, cfg.interferer_hi)}
    rows = []
    g = cfg.guard
    for stage, s in stages.items():
        f, p = psd_welch(s[g:-g], cfg.psd_segment, 0.5, t_s)
        spectra[stage] = (f, p)
        for band, (lo, hi) in bands.items():
            bp = band_power(f, p, lo / t_s, hi / t_s)
            rows.append({"stage": stage, "band": band, "power_db": float(db10(bp))})
    return SpectraSet(spectra, rows, cfg, converged)


def run(cfg: ExperimentConfig):
    """Dispatch on ``cfg.scenario``."""
    if cfg.scenario == "evm_pipeline":
        return run_evm_pipeline(cfg)
    if cfg.scenario == "psd_stages":
        return run_psd_stages(cfg)
    return run_scenario(cfg)


def write_result(result, out_dir) -> list[Path]:
    """Write CSV tables (and the resolved config) into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if isinstance(result, SpectraSet):
        io.write_psd_csv(out / "spectra.csv", result.spectra)
        io.write_rows_csv(out / "band_powers.csv", result.band_powers,
                          ["stage", "band", "power_db"])
        written += [out / "spectra.csv", out / "band_powers.csv"]
    else:
        cols = []
        for r in result.rows:
            for k in r:
                if k not in cols and k not in TIMING_COLUMNS and k != "error":
                    cols.append(k)
        cols.append("error")
        io.write_rows_csv(out / "results.csv", result.rows, cols)
        io.write_rows_csv(out / "timings.csv", result.rows,
                          ["point_index", "trial"] + list(TIMING_COLUMNS))
        io.write_rows_csv(out / "summary.csv", result.summary,
                          ["point_index", "point", "metric", "mean", "std", "min", "max", "count"])
        io.write_rows_csv(out / "metrics.csv", result.metric_table(),
                          ["point", "stage", "seed", "metric", "value_db"])
        written += [out / n for n in ("results.csv", "timings.csv", "summary.csv", "metrics.csv")]
    if result.config is not None:
        (out / "config.ini").write_text(to_ini(result.config))
        written.append(out / "config.ini")
    return written
