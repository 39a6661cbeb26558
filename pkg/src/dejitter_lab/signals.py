"""
Bandlimited test signals and the linear operators acting on them.

Functions
---------
generate_bandlimited_gaussian :
    Brickwall-filtered white Gaussian noise with a flat in-band spectrum.
resample_at_jittered_instants :
    Truncated Whittaker-Shannon evaluation at ``n*t_s + xi_n``.
bandlimited_derivative :
    Windowed FIR approximation of the ideal discrete-time differentiator.
spectral_derivative :
    Circular (FFT) ideal differentiator, exact on periodic records.
brickwall :
    Zero every DFT bin outside ``|f| <= w``.
gerchberg_papoulis_fill :
    Alternating-projection reconstruction of missing samples.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

__all__ = [
    "SampledSignal",
    "DerivativeFilterSpec",
    "ConvergenceWarning",
    "generate_bandlimited_gaussian",
    "resample_at_jittered_instants",
    "bandlimited_derivative",
    "spectral_derivative",
    "derivative_taps",
    "brickwall",
    "gerchberg_papoulis_fill",
    "interior",
]


class ConvergenceWarning(UserWarning):
    """Iterative routine stopped making progress."""


@dataclass(frozen=True)
class SampledSignal:
    """Uniformly sampled sequence with its sampling interval and bandlimit.

    ``samples`` is stored as a read-only array (float64 when ``is_real``,
    complex128 otherwise).
    """

    samples: np.ndarray
    t_s: float
    bandlimit_w: float
    is_real: bool = True

    def __post_init__(self):
        arr = np.asarray(self.samples)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("samples must be a 1-D sequence of length >= 2")
        if not self.t_s > 0:
            raise ValueError("t_s must be positive")
        nyquist = 1.0 / (2.0 * self.t_s)
        if not 0 < self.bandlimit_w <= nyquist * (1 + 1e-12):
            raise ValueError(f"bandlimit_w must lie in (0, {nyquist:g}] Hz")
        if self.is_real:
            if np.iscomplexobj(arr):
                if np.any(arr.imag != 0):
                    raise ValueError("is_real signal has nonzero imaginary parts")
                arr = arr.real
            arr = np.array(arr, dtype=np.float64)
        else:
            arr = np.array(arr, dtype=np.complex128)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def wts(self) -> float:
        """Normalized bandwidth ``W * T_s`` (at most 1/2)."""
        return self.bandlimit_w * self.t_s

    def with_samples(self, samples, **changes) -> "SampledSignal":
        """Copy with new samples; complex input promotes ``is_real`` to False."""
        samples = np.asarray(samples)
        is_real = changes.pop("is_real", self.is_real and not np.iscomplexobj(samples))
        return replace(self, samples=samples, is_real=is_real, **changes)


@dataclass(frozen=True)
class DerivativeFilterSpec:
    half_length: int = 512
    window: Literal["rectangular", "hann"] = "hann"

    def __post_init__(self):
        if self.half_length < 8:
            raise ValueError("half_length must be >= 8")
        if self.window not in ("rectangular", "hann"):
            raise ValueError(f"unknown window {self.window!r}")


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def brickwall(samples: np.ndarray, wts: float) -> np.ndarray:
    """Circular ideal lowpass keeping normalized frequencies ``|f| <= wts``."""
    samples = np.asarray(samples)
    n = samples.size
    if wts >= 0.5:
        return samples.copy()
    spec = np.fft.fft(samples)
    spec[np.abs(np.fft.fftfreq(n)) > wts] = 0.0
    out = np.fft.ifft(spec)
    return out.real if np.isrealobj(samples) else out


def generate_bandlimited_gaussian(n, t_s, w, power=1.0, seed=None, real_valued=True):
    """Stationary zero-mean Gaussian process with flat PSD on ``|f| <= w``.

    White Gaussian samples are brickwall filtered on the full (circular)
    record and rescaled so that the empirical power equals ``power``.

    Parameters
    ----------
    n : int
        Record length, at least 1024.
    t_s : float
        Sampling interval in seconds.
    w : float
        One-sided bandwidth in hertz; ``w <= 1/(2 t_s)``.
    power : float
        Target variance.
    seed : int, Generator or None
    real_valued : bool
        Real payload (default) or circular complex Gaussian.

    Returns
    -------
    SampledSignal
    """
    if n < 2**10:
        raise ValueError("n must be >= 1024")
    if not power > 0:
        raise ValueError("power must be positive")
    if w * t_s > 0.5 * (1 + 1e-12):
        raise ValueError("bandwidth exceeds Nyquist (need w*t_s <= 1/2)")
    rng = _rng(seed)
    if real_valued:
        u = rng.standard_normal(n)
    else:
        u = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    x = brickwall(u, w * t_s)
    x = x * np.sqrt(power / np.mean(np.abs(x) ** 2))
    return SampledSignal(x, t_s, w, is_real=real_valued)


def resample_at_jittered_instants(x: SampledSignal, xi, half_width: int = 512) -> SampledSignal:
    """Evaluate ``x(n t_s + xi_n)`` with the truncated Whittaker-Shannon sum.

    ``x(n t_s + xi_n) = sum_{|m| <= half_width} x_{n+m} sinc(xi_n / t_s - m)``;
    terms falling outside the record are dropped.
    """
    xi = np.asarray(getattr(xi, "xi", xi), dtype=float)
    if xi.shape != (x.n,):
        raise ValueError(f"jitter length {xi.size} != signal length {x.n}")
    if half_width < 64:
        raise ValueError("half_width must be >= 64")
    if not np.any(xi):
        return x
    samples = x.samples
    n = x.n
    delta = xi / x.t_s
    hw = min(half_width, n - 1)
    # offsets at a nonzero integer make the identity below 0/0; done directly
    near = np.round(delta)
    direct = np.flatnonzero((np.abs(delta - near) < 1e-6) & (near != 0))
    d = delta.copy()
    d[direct] = 0.5
    # sinc(d - m) = (-1)^m sin(pi d) / (pi (d - m)) for m != 0
    s = np.sin(np.pi * d) / np.pi
    out = samples * np.sinc(d)
    for m in range(1, hw + 1):
        sign = -1.0 if m % 2 else 1.0
        out[:-m] += samples[m:] * (sign * s[:-m] / (d[:-m] - m))
        out[m:] += samples[:-m] * (sign * s[m:] / (d[m:] + m))
    for i in direct:
        lo, hi = max(0, i - hw), min(n, i + hw + 1)
        m = np.arange(lo, hi) - i
        out[i] = np.sum(samples[lo:hi] * np.sinc(delta[i] - m))
    return x.with_samples(out)


def derivative_taps(spec: DerivativeFilterSpec) -> np.ndarray:
    """Taps ``h_k = (-1)^k / k`` (``h_0 = 0``), ``|k| <= half_length``, windowed."""
    k = np.arange(-spec.half_length, spec.half_length + 1)
    h = np.zeros(k.size)
    nz = k != 0
    h[nz] = (-1.0) ** k[nz] / k[nz]
    if spec.window == "hann":
        h *= 0.5 * (1.0 + np.cos(np.pi * k / (spec.half_length + 1)))
    return h


def bandlimited_derivative(x: SampledSignal, spec: DerivativeFilterSpec | None = None) -> SampledSignal:
    """``(D x)_n = (1/t_s) sum_k h_k x_{n-k}`` with a truncated, windowed ``h``.

    The first and last ``half_length`` outputs see a zero-padded record and
    should be excluded from metrics.
    """
    spec = spec or DerivativeFilterSpec()
    if x.n <= 4 * spec.half_length:
        raise ValueError("signal too short for derivative filter half_length")
    h = derivative_taps(spec)
    if x.n > 8 * h.size:
        from scipy.signal import fftconvolve
        out = fftconvolve(x.samples, h, mode="same")
    else:
        out = np.convolve(x.samples, h, mode="same")
    return x.with_samples(out / x.t_s)


def spectral_derivative(x: SampledSignal, order: int = 1) -> SampledSignal:
    """Ideal circular differentiator, frequency response ``(i Omega)^order``.

    The response at the Nyquist bin is set to zero (odd orders) to keep
    real inputs real.
    """
    n = x.n
    omega = 2.0 * np.pi * np.fft.fftfreq(n) / x.t_s
    resp = (1j * omega) ** order
    if n % 2 == 0 and order % 2 == 1:
        resp[n // 2] = 0.0
    out = np.fft.ifft(np.fft.fft(x.samples) * resp)
    return x.with_samples(out.real if x.is_real else out)


def interior(a: np.ndarray, guard: int) -> np.ndarray:
    """Drop ``guard`` samples from both ends."""
    a = np.asarray(a)
    if guard <= 0:
        return a
    if 2 * guard >= a.size:
        raise ValueError("guard removes the whole record")
    return a[guard:-guard]


@dataclass
class GapFillHistory:
    residuals: list = field(default_factory=list)
    converged: bool = True


def gerchberg_papoulis_fill(y: SampledSignal, known_mask, iterations: int = 100,
                            tol: float = 0.0, return_history: bool = False,
                            warn: bool = True):
    """Fill unknown samples of a bandlimited record by alternating projections.

    Each iteration projects onto the band ``|f| <= W`` and then reimposes the
    known samples. The returned signal is the last band projection. The
    recorded residual is the RMS mismatch between that projection and the
    known samples; it is non-increasing for consistent data.

    Parameters
    ----------
    y : SampledSignal
        Record whose values at ``known_mask`` are trusted.
    known_mask : array_like of bool or int indices
    iterations : int
    tol : float
        Stop early once the residual drops below ``tol``.
    return_history : bool
        Also return a ``GapFillHistory``.
    warn : bool
        Emit the stall warning (the history records it either way).

    Warns
    -----
    ConvergenceWarning
        The residual failed to decrease for 10 consecutive iterations.
    """
    mask = np.asarray(known_mask)
    if mask.dtype != bool:
        m = np.zeros(y.n, dtype=bool)
        m[mask] = True
        mask = m
    if mask.shape != (y.n,):
        raise ValueError("known_mask length mismatch")
    frac = mask.mean()
    if frac <= 2.0 * y.wts and y.wts < 0.5:
        raise ValueError(f"known fraction {frac:.3f} <= 2*W*T_s = {2 * y.wts:.3f}")
    known = y.samples[mask]
    g = np.where(mask, y.samples, 0.0)
    hist = GapFillHistory()
    stall = 0
    band = g
    floor = max(tol, 1e-12 * float(np.sqrt(np.mean(np.abs(known) ** 2))))
    for _ in range(max(1, iterations)):
        band = brickwall(g, y.wts)
        res = float(np.sqrt(np.mean(np.abs(band[mask] - known) ** 2)))
        if hist.residuals and res >= hist.residuals[-1] * (1 - 1e-12):
            stall += 1
        else:
            stall = 0
        hist.residuals.append(res)
        if res <= floor:
            break
        if stall >= 10:
            hist.converged = False
            if warn:
                warnings.warn("Gerchberg-Papoulis residual stalled for 10 iterations",
                              ConvergenceWarning, stacklevel=2)
            break
        g = band.copy()
        g[mask] = known
    out = y.with_samples(band)
    return (out, hist) if return_history else out
