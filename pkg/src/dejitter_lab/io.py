"""File formats: binary signal records and the CSV tables.

Binary signal record (little endian)::

    offset  size  field
    0       4     magic b"DJSG"
    4       4     uint32 version (1)
    8       8     uint64 n
    16      8     float64 t_s [s]
    24      8     float64 W [Hz]
    32      1     uint8 is_real
    33      7     padding
    40      16 n  float64 interleaved (re, im)
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .jitter import JitterTrace
from .pilots import PilotSchedule, PseudoMeasurements
from .signals import SampledSignal

MAGIC = b"DJSG"
VERSION = 1
_HEADER = struct.Struct("<4sIQddB7x")


def write_signal_bin(path, sig: SampledSignal) -> None:
    data = np.empty(2 * sig.n, dtype="<f8")
    data[0::2] = np.real(sig.samples)
    data[1::2] = np.imag(sig.samples) if not sig.is_real else 0.0
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, sig.n, sig.t_s, sig.bandlimit_w, int(sig.is_real)))
        fh.write(data.tobytes())


def read_signal_bin(path) -> SampledSignal:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("file too short for a signal header")
    magic, version, n, t_s, w, is_real = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError("not a signal record (bad magic)")
    if version != VERSION:
        raise ValueError(f"unsupported record version {version}")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if data.size != 2 * n:
        raise ValueError(f"expected {2 * n} values, found {data.size}")
    samples = data[0::2] if is_real else data[0::2] + 1j * data[1::2]
    return SampledSignal(samples, t_s, w, bool(is_real))


def write_signal_csv(path, sig: SampledSignal) -> None:
    t = np.arange(sig.n) * sig.t_s
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "t_seconds", "re", "im"])
        for i, (ti, v) in enumerate(zip(t, sig.samples)):
            w.writerow([i, repr(float(ti)), repr(float(np.real(v))), repr(float(np.imag(v)))])


def write_jitter_csv(path, trace: JitterTrace) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "xi_seconds"] + (["cov"] if trace.cov is not None else []))
        for i, v in enumerate(trace.xi):
            row = [i, repr(float(v))]
            if trace.cov is not None:
                row.append(repr(float(trace.cov[i])))
            w.writerow(row)


def read_jitter_csv(path) -> JitterTrace:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    xi = np.array([float(r["xi_seconds"]) for r in rows])
    cov = np.array([float(r["cov"]) for r in rows]) if rows and "cov" in rows[0] else None
    return JitterTrace(xi, cov)


def write_schedule_csv(path, sched: PilotSchedule) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["block", "position", "index"])
        for b, blk in enumerate(sched.blocks):
            for p, i in enumerate(blk):
                w.writerow([b, p, int(i)])


def read_schedule_csv(path, n_total: int, k_gap: int | None = None) -> PilotSchedule:
    with open(path, newline="") as fh:
        rows = [(int(r["block"]), int(r["index"])) for r in csv.DictReader(fh)]
    n_blocks = max(b for b, _ in rows) + 1
    blocks = tuple(np.array([i for b, i in rows if b == k]) for k in range(n_blocks))
    indices = np.unique(np.concatenate(blocks))
    if k_gap is None:
        k_gap = int(np.median(np.diff(indices))) - 1 if indices.size > 1 else 0
    return PilotSchedule(n_total, k_gap, int(blocks[0].size), indices, blocks)


MEAS_COLUMNS = ["index", "m_tilde", "deriv_sq", "reliable"]


def write_measurements_csv(path, meas: PseudoMeasurements) -> None:
    """Columns ``index, m_tilde [s], deriv_sq [1/s^2 amplitude^2], reliable``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(MEAS_COLUMNS)
        for i, m, d, r in zip(meas.indices, meas.m, meas.weights_basis**2, meas.reliable):
            w.writerow([int(i), repr(float(m)), repr(float(d)), int(bool(r))])


def read_measurements_csv(path):
    """Return ``(index, m_tilde, deriv_sq, reliable)`` arrays."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"index", "m_tilde", "deriv_sq"} - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"measurement CSV lacks columns {sorted(missing)}")
        rows = list(reader)
    idx = np.array([int(r["index"]) for r in rows])
    m = np.array([float(r["m_tilde"]) for r in rows])
    d = np.array([float(r["deriv_sq"]) for r in rows])
    rel = np.array([bool(int(r.get("reliable") or 1)) for r in rows])
    return idx, m, d, rel


def write_rows_csv(path, rows: list[dict], columns: list[str] | None = None) -> None:
    if columns is None:
        columns = []
        for r in rows:
            for k in r:
                if k not in columns:
                    columns.append(k)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(r.get(k, "")) for k in columns})


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def write_psd_csv(path, spectra: dict) -> None:
    """Long table ``stage, freq_hz, psd`` with one spectrum per stage."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["stage", "freq_hz", "psd"])
        for stage, (f, p) in spectra.items():
            for fi, pi in zip(f, p):
                w.writerow([stage, repr(float(fi)), repr(float(pi))])
