"""Blockwise heteroscedastic weighted least-squares jitter interpolation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .jitter import JitterTrace
from .pilots import PilotSchedule, PseudoMeasurements, build_schedule, pseudo_measure
from .signals import SampledSignal

__all__ = ["PolyConfig", "BlockFit", "DejitterOutput", "fit_block", "dejitter_poly"]


@dataclass(frozen=True)
class PolyConfig:
    degree: int = 4
    block_size: int = 500
    ridge: float = 0.0

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be >= 0")
        if self.block_size < self.degree + 2:
            raise ValueError("block_size must be >= degree + 2")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")


@dataclass
class BlockFit:
    """Polynomial of one block in the local coordinate ``(n - center) / scale``."""

    coef: np.ndarray
    center: float
    scale: float
    cond: float = 1.0
    regularized: bool = False
    n_used: int = 0
    n_flagged: int = 0

    def __call__(self, n) -> np.ndarray:
        t = (np.asarray(n, dtype=float) - self.center) / self.scale
        return np.polynomial.polynomial.polyval(t, self.coef)


@dataclass
class DejitterOutput:
    xi_hat: JitterTrace
    x_hat: SampledSignal
    blocks: list = field(default_factory=list)

    def diagnostics(self) -> list[dict]:
        return [
            {"block": i, "cond": b.cond, "regularized": b.regularized,
             "n_used": b.n_used, "n_flagged": b.n_flagged}
            for i, b in enumerate(self.blocks)
        ]


def _local_coords(times):
    times = np.asarray(times, dtype=float)
    lo, hi = times.min(), times.max()
    center = 0.5 * (lo + hi)
    scale = 0.5 * (hi - lo) if hi > lo else 1.0
    return center, scale


def fit_block(m, weights, times, cfg: PolyConfig) -> BlockFit:
    """Weighted least-squares polynomial through one block of measurements.

    Solves ``beta = (M^T W M)^{-1} M^T W m`` with ``M`` the Vandermonde
    matrix of the local time coordinate. Zero-weight entries are ignored.
    If fewer than ``degree + 1`` points carry weight, or ``M^T W M`` is
    numerically singular, a ridge term is added and the fit is flagged.
    """
    m = np.asarray(m, dtype=float)
    weights = np.asarray(weights, dtype=float)
    times = np.asarray(times, dtype=float)
    center, scale = _local_coords(times)
    d = cfg.degree
    used = weights > 0
    n_used = int(used.sum())
    fit = BlockFit(np.zeros(d + 1), center, scale, n_used=n_used,
                   n_flagged=int((~used).sum()))
    if n_used == 0:
        fit.regularized = True
        fit.cond = np.inf
        return fit
    V = np.vander((times - center) / scale, d + 1, increasing=True)
    # normalize weights; the fitted polynomial is invariant to their scale
    wn = weights / weights[used].max()
    A = V.T @ (wn[:, None] * V)
    b = V.T @ (wn * m)
    cond = np.linalg.cond(A) if n_used >= d + 1 else np.inf
    ridge = cfg.ridge
    if not np.isfinite(cond) or cond > 1e12:
        ridge = max(ridge, 1e-10 * np.trace(A) / (d + 1))
        fit.regularized = True
    if ridge > 0:
        A = A + ridge * np.eye(d + 1)
    fit.coef = np.linalg.solve(A, b)
    fit.cond = float(cond)
    return fit


def dejitter_poly(y: SampledSignal, y_prime: SampledSignal, x_pilot, sched: PilotSchedule,
                  cfg: PolyConfig | None = None,
                  meas: PseudoMeasurements | None = None) -> DejitterOutput:
    """Estimate jitter by blockwise WLS polynomials and subtract ``xi_hat * y'``.

    Block ``l`` owns indices ``(first_l, last_l]``; the first block also owns
    everything up to its first pilot and the last block everything after its
    last pilot. Weights are ``|y'_n|^2`` at reliable pilots and 0 otherwise.
    """
    cfg = cfg or PolyConfig(block_size=sched.block_size)
    if cfg.block_size != sched.block_size:
        sched = build_schedule(sched.n_total, sched.k_gap, cfg.block_size)
    if meas is None:
        meas = pseudo_measure(y, y_prime, x_pilot, sched)
    if meas.indices.size != sched.indices.size:
        raise ValueError("pseudo-measurements do not match the schedule")
    weights = np.where(meas.reliable, meas.weights_basis**2, 0.0)
    xi_hat = np.zeros(y.n)
    fits = []
    n_blocks = len(sched.blocks)
    for l, blk in enumerate(sched.blocks):
        sel = np.searchsorted(meas.indices, blk)
        fit = fit_block(meas.m[sel], weights[sel], blk, cfg)
        fits.append(fit)
        lo = 0 if l == 0 else int(blk[0]) + 1
        hi = y.n if l == n_blocks - 1 else int(blk[-1]) + 1
        if hi > lo:
            xi_hat[lo:hi] = fit(np.arange(lo, hi))
    x_hat = y.with_samples(y.samples - xi_hat * y_prime.samples)
    return DejitterOutput(JitterTrace(xi_hat), x_hat, fits)
