"""Linearization-error analysis: closed forms, quadrature and Monte Carlo checks.

Frequencies are normalized (rad/sample) unless stated otherwise.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .jitter import Ar1Params, ar1_generate
from .metrics import deriv_variance
from .signals import generate_bandlimited_gaussian, interior, spectral_derivative

__all__ = [
    "QuadResult",
    "prop1_ratio",
    "prop1_monte_carlo",
    "poisson_double_integral",
    "prop2_variance",
    "prop2_monte_carlo",
    "violet_noise_variance",
    "oob_integral",
    "wrap",
]


def wrap(a):
    """Wrap angles into ``[-pi, pi)``."""
    return (np.asarray(a) + np.pi) % (2.0 * np.pi) - np.pi


@dataclass(frozen=True)
class QuadResult:
    value: float
    abserr: float
    converged: bool


def prop1_ratio(params: Ar1Params, w: float, t_s: float | None = None) -> float:
    """Closed-form ``var(xi^2 x'') / var(xi x') = (36 pi^2 / 5) sigma_xi^2 W^2``."""
    return 36.0 * math.pi**2 / 5.0 * params.var_xi * w**2


def violet_noise_variance(sigma_w: float, t_s: float) -> float:
    """Variance of the ideal derivative of white noise: ``pi^2 sigma_w^2 / (3 T_s^2)``."""
    return math.pi**2 * sigma_w**2 / (3.0 * t_s**2)


def _inner(nu: float, b: float, epsabs: float) -> tuple[float, float]:
    """``int_{-pi}^{pi} w^2 wrap(w - nu)^2 chi{|wrap(w - nu)| <= b} dw``."""
    # support in w: nu + [-b, b] shifted by multiples of 2 pi, intersected with [-pi, pi]
    total = err = 0.0
    for k in (-1, 0, 1):
        lo = max(-math.pi, nu - b + 2 * math.pi * k)
        hi = min(math.pi, nu + b + 2 * math.pi * k)
        if hi <= lo:
            continue
        shift = nu + 2 * math.pi * k
        v, e = quad(lambda w: w * w * (w - shift) ** 2, lo, hi, epsabs=epsabs)
        total += v
        err += e
    return total, err


def poisson_double_integral(phi: float, wts: float, tol: float = 1e-10) -> QuadResult:
    """Nested adaptive quadrature of

    ``I = int int w^2 wrap(w-nu)^2 / (1 - 2 phi cos nu + phi^2) chi{|wrap(w-nu)| <= 2 pi W T_s} dw dnu``

    over ``[-pi, pi]^2``. The inner integral is split where the wrapped
    indicator switches; the outer one is split at the kernel peak and at the
    kinks of the inner integral. ``tol`` is a relative tolerance.
    """
    if not 0 < wts <= 0.5:
        raise ValueError("wts must lie in (0, 1/2]")
    b = 2.0 * math.pi * wts
    scale = (2.0 * math.pi**3 / 3.0) * (2.0 * b**3 / 3.0)  # phi = 0 value
    epsabs = tol * scale * 1e-3

    def outer(nu):
        v, _ = _inner(nu, b, epsabs)
        return v / ((1.0 - phi) ** 2 + 4.0 * phi * math.sin(nu / 2.0) ** 2)

    # integrand is even in nu
    width = max(1.0 - phi, 1e-6)
    pts = sorted({p for p in (width, 10 * width, 100 * width, b, math.pi - b, 2 * math.pi - b)
                  if 0 < p < math.pi})
    edges = [0.0] + pts + [math.pi]
    total = err = 0.0
    ok = True
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        for lo, hi in zip(edges[:-1], edges[1:]):
            try:
                v, e = quad(outer, lo, hi, epsrel=tol, epsabs=0.0, limit=200)
            except IntegrationWarning:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", IntegrationWarning)
                    v, e = quad(outer, lo, hi, epsrel=tol, epsabs=0.0, limit=1000)
                ok = ok and e <= 10 * tol * max(abs(v), 1e-300)
            total += v
            err += e
    return QuadResult(2.0 * total, 2.0 * err, ok)


def prop2_variance(params: Ar1Params, w: float, t_s: float, quad_tol: float = 1e-10,
                   sigma_x2: float = 1.0, return_quad: bool = False):
    """``var(D(xi * x')_n)`` from the double-integral formula.

    ``(sigma_xi^2 / T_s^2) * 3 (1 - phi^2) / (32 pi^4 (W T_s)^3) * I * sigma_x'^2``.
    Warns when the quadrature misses ``quad_tol``.
    """
    if not quad_tol > 0:
        raise ValueError("quad_tol must be positive")
    wts = w * t_s
    q = poisson_double_integral(params.phi, wts, quad_tol)
    if not q.converged:
        warnings.warn(f"double integral reached abserr {q.abserr:.3g} only", IntegrationWarning)
    omp2 = (1.0 - params.phi) * (1.0 + params.phi)
    factor = 3.0 * omp2 / (32.0 * math.pi**4 * wts**3)
    val = params.var_xi / t_s**2 * factor * q.value * deriv_variance(sigma_x2, w)
    return (val, q) if return_quad else val


def _records(params, w, t_s, n, trials, seed):
    ss = np.random.SeedSequence(seed)
    for child in ss.spawn(trials):
        rng = np.random.default_rng(child)
        x = generate_bandlimited_gaussian(n, t_s, w, 1.0, rng)
        xi = ar1_generate(params, n, rng).xi
        yield x, xi


def prop2_monte_carlo(params: Ar1Params, w: float, t_s: float, n: int = 2**16,
                      trials: int = 32, seed=0, guard: int = 4096) -> float:
    """Sample estimate of ``var(D(xi * x'))`` with an ideal FFT differentiator.

    Includes the factor ``sigma_x'^2`` for a unit-power signal.
    """
    acc = 0.0
    for x, xi in _records(params, w, t_s, n, trials, seed):
        xp = spectral_derivative(x).samples
        u = x.with_samples(xi * xp)
        du = spectral_derivative(u).samples
        acc += float(np.mean(interior(du, guard) ** 2))
    return acc / trials


def prop1_monte_carlo(params: Ar1Params, w: float, t_s: float, n: int = 2**16,
                      trials: int = 64, seed=0) -> float:
    """Sample ratio ``var(xi^2 x'') / var(xi x')`` pooled over ``trials`` records."""
    num = den = 0.0
    for x, xi in _records(params, w, t_s, n, trials, seed):
        xp = spectral_derivative(x).samples
        xpp = spectral_derivative(x, 2).samples
        num += float(np.sum((xi**2 * xpp) ** 2))
        den += float(np.sum((xi * xp) ** 2))
    return num / den


def oob_integral(nu, omega_bar: float, phi: float):
    """``I(nu) = int_{-omega_bar}^{omega_bar} w^2 / (1 + phi^2 - 2 phi cos(nu - w)) dw``."""

    def one(v):
        f = lambda w: w * w / ((1.0 - phi) ** 2 + 4.0 * phi * math.sin((v - w) / 2.0) ** 2)
        pts = [p for p in (wrap(v) + 2 * math.pi * k for k in (-1, 0, 1)) if -omega_bar < p < omega_bar]
        val, _ = quad(f, -omega_bar, omega_bar, points=pts or None, limit=400, epsrel=1e-10)
        return val

    nu_arr = np.atleast_1d(np.asarray(nu, dtype=float))
    out = np.array([one(float(v)) for v in nu_arr])
    return out if np.ndim(nu) else float(out[0])
