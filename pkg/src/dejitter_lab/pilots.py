"""Uniform pilot schedules and jitter pseudo-measurements.

Indices are 0-based: the pilot set is ``{0, K+1, 2(K+1), ...}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import SampledSignal

__all__ = [
    "PilotSchedule",
    "PseudoMeasurements",
    "build_schedule",
    "k_gap_for_density",
    "pseudo_measure",
    "DERIV_FLOOR_REL",
]

DERIV_FLOOR_REL = 1e-3


@dataclass(frozen=True)
class PilotSchedule:
    n_total: int
    k_gap: int
    block_size: int
    indices: np.ndarray
    blocks: tuple

    @property
    def density(self) -> float:
        return self.indices.size / self.n_total

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.n_total, dtype=bool)
        m[self.indices] = True
        return m


def k_gap_for_density(density: float) -> int:
    """Number of data samples between pilots for a target pilot density."""
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    return max(0, int(round(1.0 / density)) - 1)


def build_schedule(n_total: int, k_gap: int, block_size: int = 500) -> PilotSchedule:
    """Pilots every ``k_gap + 1`` samples, grouped into blocks of ``block_size``.

    Consecutive blocks share their boundary pilot. The last block may be
    shorter; a trailing block that would only repeat the previous endpoint
    is not created.
    """
    if block_size < 2:
        raise ValueError("block_size must be >= 2")
    if k_gap < 0:
        raise ValueError("k_gap must be >= 0")
    if n_total < 1:
        raise ValueError("n_total must be >= 1")
    indices = np.arange(0, n_total, k_gap + 1)
    step = block_size - 1
    blocks = []
    start = 0
    while True:
        stop = min(start + block_size, indices.size)
        blocks.append(indices[start:stop])
        if stop >= indices.size:
            break
        start += step
    for b in blocks:
        b.setflags(write=False)
    indices.setflags(write=False)
    return PilotSchedule(n_total, k_gap, block_size, indices, tuple(blocks))


@dataclass(frozen=True)
class PseudoMeasurements:
    """Jitter pseudo-measurements ``m_n = (y_n - x_n) / y'_n`` at pilots.

    ``reliable`` is False where ``|y'_n|`` fell below the derivative floor;
    ``m`` is set to 0 there and must not be used.
    """

    indices: np.ndarray
    m: np.ndarray
    weights_basis: np.ndarray
    reliable: np.ndarray
    floor: float

    @property
    def n_flagged(self) -> int:
        return int((~self.reliable).sum())

    def subset(self, sel) -> "PseudoMeasurements":
        return PseudoMeasurements(self.indices[sel], self.m[sel], self.weights_basis[sel],
                                  self.reliable[sel], self.floor)


def pseudo_measure(y: SampledSignal, y_prime: SampledSignal, x_pilot, sched: PilotSchedule,
                   floor: float | None = None) -> PseudoMeasurements:
    """Noisy jitter estimates at pilot positions.

    Parameters
    ----------
    y, y_prime : SampledSignal
        Observation and its derivative.
    x_pilot : array_like
        Known clean values, either one per pilot or a full-length record.
    sched : PilotSchedule
    floor : float, optional
        Minimum ``|y'|``; defaults to ``1e-3 * rms(y')``.
    """
    idx = sched.indices
    x_pilot = np.asarray(x_pilot)
    if x_pilot.size == y.n and idx.size != y.n:
        x_pilot = x_pilot[idx]
    if x_pilot.size != idx.size:
        raise ValueError("x_pilot must cover every pilot index")
    if floor is None:
        floor = DERIV_FLOOR_REL * float(np.sqrt(np.mean(np.abs(y_prime.samples) ** 2)))
    d = y_prime.samples[idx]
    r = y.samples[idx] - x_pilot
    mag = np.abs(d)
    reliable = mag >= floor
    m = np.zeros(idx.size)
    safe = np.where(reliable, mag, 1.0)
    # least-squares real solution of xi * y' = y - x
    m[reliable] = (np.real(r * np.conj(d)) / safe**2)[reliable]
    return PseudoMeasurements(idx.copy(), m, mag, reliable, float(floor))
