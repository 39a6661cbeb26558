"""AR(1) sampling-clock jitter and the jittered observation model."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.signal import lfilter

from .signals import (
    DerivativeFilterSpec,
    SampledSignal,
    _rng,
    bandlimited_derivative,
    resample_at_jittered_instants,
)

__all__ = [
    "Ar1Params",
    "JitterTrace",
    "CLAMP_FRACTION",
    "ar1_generate",
    "ar1_psd",
    "make_observation",
    "jitter_percentage",
    "sigma_eps_for_percentage",
]

CLAMP_FRACTION = 0.49


@dataclass(frozen=True)
class Ar1Params:
    """Jitter dynamics ``xi_n = phi xi_{n-1} + eps_n`` plus measurement noise.

    ``sigma_eps`` is in seconds, ``sigma_w`` in signal amplitude units.
    """

    phi: float
    sigma_eps: float
    sigma_w: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.phi < 1.0):
            raise ValueError(f"phi must lie in [0, 1), got {self.phi}")
        if self.sigma_eps < 0 or self.sigma_w < 0:
            raise ValueError("standard deviations must be nonnegative")

    @property
    def sigma_xi(self) -> float:
        """Stationary standard deviation ``sigma_eps / sqrt(1 - phi^2)``."""
        # (1 - phi)(1 + phi) keeps precision for phi close to 1
        return self.sigma_eps / np.sqrt((1.0 - self.phi) * (1.0 + self.phi))

    @property
    def var_xi(self) -> float:
        return self.sigma_xi**2


@dataclass(frozen=True)
class JitterTrace:
    """Jitter sequence in seconds, optionally with per-sample variances."""

    xi: np.ndarray
    cov: np.ndarray | None = None
    clamped: int = 0

    def __post_init__(self):
        xi = np.array(self.xi, dtype=float)
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        if self.cov is not None:
            cov = np.array(self.cov, dtype=float)
            if cov.shape != xi.shape:
                raise ValueError("cov must match xi in length")
            cov.setflags(write=False)
            object.__setattr__(self, "cov", cov)

    def __len__(self) -> int:
        return self.xi.size


def ar1_generate(params: Ar1Params, n: int, seed=None, t_s: float | None = None) -> JitterTrace:
    """Stationary AR(1) path of length ``n``.

    With ``t_s`` given, values are clamped to ``+-0.49 t_s`` and the number
    of clamped samples is stored in ``JitterTrace.clamped``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _rng(seed)
    eps = rng.standard_normal(n) * params.sigma_eps
    eps[0] = rng.standard_normal() * params.sigma_xi
    xi = lfilter([1.0], [1.0, -params.phi], eps)
    clamped = 0
    if t_s is not None:
        lim = CLAMP_FRACTION * t_s
        over = np.abs(xi) > lim
        clamped = int(over.sum())
        if clamped:
            xi = np.clip(xi, -lim, lim)
    return JitterTrace(xi, clamped=clamped)


def ar1_psd(params: Ar1Params, omega):
    """``sigma_eps^2 / (1 + phi^2 - 2 phi cos(omega))``, omega in rad/sample."""
    omega = np.asarray(omega, dtype=float)
    phi = params.phi
    # (1-phi)^2 + 2 phi (1 - cos w); 1 - cos w = 2 sin^2(w/2) avoids cancellation
    denom = (1.0 - phi) ** 2 + 4.0 * phi * np.sin(omega / 2.0) ** 2
    return params.sigma_eps**2 / denom


def make_observation(x: SampledSignal, xi, sigma_w: float,
                     mode: Literal["exact", "linearized"] = "exact", seed=None,
                     half_width: int = 512,
                     deriv_spec: DerivativeFilterSpec | None = None) -> SampledSignal:
    """Jittered, noisy record ``y``.

    ``exact``: ``x(n t_s + xi_n) + w_n`` through the sinc resampler.
    ``linearized``: ``x_n + xi_n x'_n + w_n`` with ``x'`` from
    :func:`bandlimited_derivative`.
    """
    xi = np.asarray(getattr(xi, "xi", xi), dtype=float)
    if xi.shape != (x.n,):
        raise ValueError("jitter and signal lengths differ")
    if mode == "exact":
        core = resample_at_jittered_instants(x, xi, half_width).samples
    elif mode == "linearized":
        core = x.samples + xi * bandlimited_derivative(x, deriv_spec).samples
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if sigma_w > 0:
        rng = _rng(seed)
        if x.is_real:
            noise = sigma_w * rng.standard_normal(x.n)
        else:
            noise = sigma_w * (rng.standard_normal(x.n)
                               + 1j * rng.standard_normal(x.n)) / np.sqrt(2.0)
        core = core + noise
    return x.with_samples(core)


def jitter_percentage(params: Ar1Params, t_s: float) -> float:
    """``sigma_xi / t_s`` (a fraction, not multiplied by 100)."""
    return params.sigma_xi / t_s


def sigma_eps_for_percentage(pct: float, phi: float, t_s: float) -> float:
    """Innovation std giving ``sigma_xi / t_s == pct``."""
    return pct * t_s * np.sqrt((1.0 - phi) * (1.0 + phi))
