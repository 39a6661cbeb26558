"""Kalman filter and RTS smoother for AR(1) jitter observed only at pilots.

The state is the scalar jitter ``xi_n``; the observation at a pilot is
``y_n - x_n = y'_n xi_n + w_n``. Non-pilot steps skip the measurement
update outright, which is the ``R_n = +inf`` limit of the textbook filter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .jitter import JitterTrace
from .pilots import PilotSchedule, pseudo_measure
from .signals import SampledSignal

__all__ = ["KalmanForward", "SmootherOutput", "kalman_forward", "kalman_smooth", "dejitter_kalman"]


@dataclass
class KalmanForward:
    """Per-step filter quantities; ``gain`` is 0 where no update happened."""

    xi_pred: np.ndarray
    p_pred: np.ndarray
    xi_filt: np.ndarray
    p_filt: np.ndarray
    gain: np.ndarray
    innovation: np.ndarray
    innovation_var: np.ndarray
    updated: np.ndarray
    y: SampledSignal
    y_prime: SampledSignal
    loglik: float = 0.0

    def __len__(self) -> int:
        return self.xi_filt.size


@dataclass
class SmootherOutput:
    xi_smooth: JitterTrace
    x_hat: SampledSignal
    smoother_gain: np.ndarray
    loglik: float | None = None


def kalman_forward(y: SampledSignal, y_prime: SampledSignal, x_pilot, sched: PilotSchedule,
                   params, init: tuple[float, float] | None = None,
                   reliable=None, huge_r: float | None = None) -> KalmanForward:
    """Forward pass over every sample, updating only at (reliable) pilots.

    Parameters
    ----------
    y, y_prime : SampledSignal
    x_pilot : array_like
        Clean values at the pilots (one per pilot, or a full-length record).
    sched : PilotSchedule
    params : Ar1Params or any object with ``phi``, ``sigma_eps``, ``sigma_w``
    init : (mean, variance), optional
        Prior for the first sample. Defaults to the stationary prior
        ``(0, sigma_eps^2 / (1 - phi^2))``.
    reliable : array_like of bool, optional
        Per-pilot flags; unreliable pilots are treated as missing. Defaults
        to the derivative-floor test of :func:`pseudo_measure`.
    huge_r : float, optional
        Instead of skipping, update non-pilots with this measurement
        variance (used to check the skip logic).

    Raises
    ------
    FloatingPointError
        Non-finite innovation at a pilot.
    """
    phi = float(params.phi)
    q = float(params.sigma_eps) ** 2
    r = float(params.sigma_w) ** 2
    if init is None:
        init = (0.0, q / ((1.0 - phi) * (1.0 + phi)))
    m0, p0 = float(init[0]), float(init[1])
    if p0 < 0:
        raise ValueError("initial variance must be >= 0")
    n = y.n
    idx = sched.indices
    x_pilot = np.asarray(x_pilot)
    if x_pilot.size == n and idx.size != n:
        x_pilot = x_pilot[idx]
    if reliable is None:
        reliable = pseudo_measure(y, y_prime, x_pilot, sched).reliable
    reliable = np.asarray(reliable, dtype=bool)

    complex_obs = not (y.is_real and y_prime.is_real)
    dtype = complex if complex_obs else float
    resid = np.zeros(n, dtype=dtype)
    resid[:] = y.samples
    resid[idx] -= x_pilot
    upd = np.zeros(n, dtype=bool)
    upd[idx[reliable]] = True

    H = y_prime.samples.tolist()
    Z = resid.tolist()
    U = upd.tolist()
    xp = [0.0] * n
    pp = [0.0] * n
    xf = [0.0] * n
    pf = [0.0] * n
    kg = [0.0] * n
    inn = [0.0] * n
    sv = [0.0] * n
    loglik = 0.0
    log2pi = math.log(2.0 * math.pi)
    m, p = m0, p0
    for k in range(n):
        if k > 0:
            m = phi * m
            p = phi * phi * p + q
        xp[k] = m
        pp[k] = p
        if U[k]:
            rk = r
        elif huge_r is not None:
            rk = huge_r
        else:
            xf[k] = m
            pf[k] = p
            continue
        h = H[k]
        e = Z[k] - h * m
        if p == 0.0 and rk == 0.0:
            # degenerate (no jitter, no noise): state already known exactly
            xf[k] = m
            pf[k] = p
            continue
        if complex_obs:
            h2 = (h * h.conjugate()).real
            s = h2 * p + rk
            g = p * h.conjugate() / s
            m = (m + g * e).real
            p = p - (g * h).real * p
        else:
            s = h * h * p + rk
            g = p * h / s
            m = m + g * e
            p = p - g * h * p
        if U[k]:
            ee = abs(e) ** 2
            if not math.isfinite(ee):
                raise FloatingPointError(f"non-finite innovation at index {k}")
            loglik -= 0.5 * (log2pi + math.log(s) + ee / s)
        xf[k] = m
        pf[k] = p
        kg[k] = g
        inn[k] = e
        sv[k] = s
    return KalmanForward(
        np.array(xp), np.array(pp), np.array(xf), np.array(pf),
        np.array(kg, dtype=dtype), np.array(inn, dtype=dtype), np.array(sv), upd,
        y, y_prime, float(loglik),
    )


def kalman_smooth(forward: KalmanForward, params) -> SmootherOutput:
    """Rauch-Tung-Striebel backward pass.

    ``C_n = phi P_{n|n} / P_{n+1|n}``,
    ``xi_{n|N} = xi_{n|n} + C_n (xi_{n+1|N} - xi_{n+1|n})``,
    ``P_{n|N} = P_{n|n} + C_n^2 (P_{n+1|N} - P_{n+1|n})``.
    Returns the smoothed trace (with variances) and ``x_hat = y - xi y'``.
    """
    phi = float(params.phi)
    n = len(forward)
    xf = forward.xi_filt.tolist()
    pf = forward.p_filt.tolist()
    xp = forward.xi_pred.tolist()
    pp = forward.p_pred.tolist()
    xs = [0.0] * n
    ps = [0.0] * n
    cg = [0.0] * n
    xs[-1] = xf[-1]
    ps[-1] = pf[-1]
    for k in range(n - 2, -1, -1):
        c = phi * pf[k] / pp[k + 1] if pp[k + 1] > 0 else 0.0
        cg[k] = c
        xs[k] = xf[k] + c * (xs[k + 1] - xp[k + 1])
        ps[k] = pf[k] + c * c * (ps[k + 1] - pp[k + 1])
    xs = np.array(xs)
    ps = np.maximum(np.array(ps), 0.0)
    y, yp = forward.y, forward.y_prime
    x_hat = y.with_samples(y.samples - xs * yp.samples)
    return SmootherOutput(JitterTrace(xs, ps), x_hat, np.array(cg), forward.loglik)


def dejitter_kalman(y: SampledSignal, y_prime: SampledSignal, x_pilot, sched: PilotSchedule,
                    params, init=None) -> SmootherOutput:
    """Forward filter plus smoother in one call."""
    fwd = kalman_forward(y, y_prime, x_pilot, sched, params, init)
    return kalman_smooth(fwd, params)
