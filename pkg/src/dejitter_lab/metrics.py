"""Signal-quality metrics: SINADR, NDR, EVM and Welch spectra."""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import welch

from .jitter import Ar1Params
from .signals import SampledSignal, interior

__all__ = [
    "SINADR_CAP_DB",
    "db10",
    "undb10",
    "deriv_variance",
    "sinadr_analytic",
    "sinadr_empirical",
    "ndr_db",
    "sigma_w_for_ndr",
    "sigma_w_for_sinadr",
    "evm",
    "delta_evm",
    "ls_scale",
    "psd_welch",
    "band_power",
]

SINADR_CAP_DB = 200.0


def db10(ratio):
    return 10.0 * np.log10(ratio)


def undb10(value_db):
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def deriv_variance(sigma_x2: float, w: float) -> float:
    """Variance of the derivative of a flat-spectrum process: ``4 pi^2 W^2 sigma_x^2 / 3``."""
    return 4.0 * math.pi**2 * w**2 * sigma_x2 / 3.0


def sinadr_analytic(params: Ar1Params, sigma_x2: float, w: float) -> float:
    """Closed-form SINADR in dB for the linearized model.

    ``10 log10[3(1-phi^2) s_x^2 / (3(1-phi^2) s_w^2 + 4 pi^2 W^2 s_eps^2 s_x^2)]``.
    """
    omp2 = (1.0 - params.phi) * (1.0 + params.phi)
    num = 3.0 * omp2 * sigma_x2
    den = 3.0 * omp2 * params.sigma_w**2 + 4.0 * math.pi**2 * w**2 * params.sigma_eps**2 * sigma_x2
    if den == 0:
        return math.inf
    return float(db10(num / den))


def sinadr_empirical(x_ref: SampledSignal, x_test: SampledSignal, guard: int = 1024) -> float:
    """Signal power over residual power in dB, interior samples only.

    Capped at 200 dB when the residual vanishes.
    """
    a = np.asarray(getattr(x_ref, "samples", x_ref))
    b = np.asarray(getattr(x_test, "samples", x_test))
    if a.shape != b.shape:
        raise ValueError("records differ in length")
    a = interior(a, guard)
    b = interior(b, guard)
    err = float(np.mean(np.abs(b - a) ** 2))
    sig = float(np.mean(np.abs(a) ** 2))
    if err == 0:
        return SINADR_CAP_DB
    return min(SINADR_CAP_DB, float(db10(sig / err)))


def ndr_db(params: Ar1Params, sigma_x2: float, w: float) -> float:
    """Noise-to-distortion ratio ``var(w) / var(xi x')`` in dB (``-inf`` without noise)."""
    dist = params.var_xi * deriv_variance(sigma_x2, w)
    if params.sigma_w == 0:
        return -math.inf
    if dist == 0:
        return math.inf
    return float(db10(params.sigma_w**2 / dist))


def sigma_w_for_ndr(ndr: float, sigma_xi: float, sigma_x2: float, w: float) -> float:
    """Noise std that yields the requested NDR (dB)."""
    return math.sqrt(10.0 ** (ndr / 10.0) * sigma_xi**2 * deriv_variance(sigma_x2, w))


def sigma_w_for_sinadr(target_db: float, sigma_xi: float, sigma_x2: float, w: float) -> float:
    """Noise std that brings the total SINADR to ``target_db``.

    Raises
    ------
    ValueError
        The jitter distortion alone already exceeds the budget.
    """
    var_w = sigma_x2 / 10.0 ** (target_db / 10.0) - sigma_xi**2 * deriv_variance(sigma_x2, w)
    if var_w < 0:
        raise ValueError("target SINADR unreachable: jitter distortion alone exceeds it")
    return math.sqrt(var_w)


def ls_scale(ref, est):
    """Complex scalar ``a`` minimizing ``||a * est - ref||^2``."""
    ref = np.asarray(ref)
    est = np.asarray(est)
    den = np.vdot(est, est)
    if den == 0:
        return 1.0
    a = np.vdot(est, ref) / den
    return a.real if np.isrealobj(ref) and np.isrealobj(est) else a


def evm(ref_symbols, est_symbols) -> float:
    """RMS error vector magnitude relative to the reference RMS."""
    s = np.asarray(ref_symbols)
    e = np.asarray(est_symbols)
    if s.shape != e.shape:
        raise ValueError("symbol sequences differ in length")
    return float(np.sqrt(np.mean(np.abs(e - s) ** 2) / np.mean(np.abs(s) ** 2)))


def delta_evm(evm_uncomp: float, evm_comp: float) -> float:
    """``20 log10(EVM_uncomp / EVM_comp)``; ``+inf`` for a perfect compensation."""
    if evm_comp == evm_uncomp:
        return 0.0
    if evm_comp == 0:
        return math.inf
    if evm_uncomp == 0:
        return -math.inf
    return 20.0 * math.log10(evm_uncomp / evm_comp)


def psd_welch(x, segment: int = 4096, overlap: float = 0.5, t_s: float | None = None):
    """Hann-window Welch estimate.

    Returns ``(freqs, psd)`` as a two-sided density (frequencies in hertz
    when ``t_s`` is known, cycles/sample otherwise). ``sum(psd) * df`` is
    the window-weighted power averaged over segments, which estimates the
    mean power of ``x``.
    """
    samples = np.asarray(getattr(x, "samples", x))
    if t_s is None:
        t_s = getattr(x, "t_s", 1.0)
    segment = min(segment, samples.size)
    noverlap = int(round(overlap * segment))
    f, p = welch(samples, fs=1.0 / t_s, window="hann", nperseg=segment, noverlap=noverlap,
                 return_onesided=False, detrend=False, scaling="density")
    order = np.argsort(f)
    return f[order], p[order]


def band_power(freqs, psd, lo: float, hi: float) -> float:
    """Integrated PSD over ``lo <= |f| <= hi``."""
    freqs = np.asarray(freqs)
    df = freqs[1] - freqs[0]
    sel = (np.abs(freqs) >= lo) & (np.abs(freqs) <= hi)
    return float(np.sum(np.asarray(psd)[sel]) * df)
