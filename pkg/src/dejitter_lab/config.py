"""Experiment configuration: a dataclass plus an INI-style loader.

A config file has sections, but every key name is unique across sections, so
``--set key=value`` overrides work without a section prefix::

    [experiment]
    scenario = density_sweep
    trials = 5
    seed = 0

    [signal]
    n = 65536
    t_s = 1e-8
    w = 4e7

    [jitter]
    phi = 0.999
    jitter_ratio = 0.015

    [noise]
    ndr_db = -10

    [pilots]
    density = 0.05

    [sweep]
    values = 0.01, 0.02, 0.04, 0.1, 0.2
"""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path

__all__ = ["ConfigError", "ExperimentConfig", "SCENARIOS", "load_config", "parse_config",
           "apply_overrides", "to_ini"]

SCENARIOS = ("ndr_sweep", "density_sweep", "jitter_sweep", "bandwidth_sweep",
             "mle_vs_oracle", "evm_pipeline", "psd_stages")

NOISE_KEYS = ("sigma_w", "ndr_db", "sinadr_db")
PILOT_KEYS = ("k_gap", "density")
JITTER_KEYS = ("jitter_ratio", "sigma_eps")
KALMAN_MODES = ("oracle", "mle", "fixed")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    """Everything needed to run one scenario.

    Exactly one of ``sigma_w``, ``ndr_db``, ``sinadr_db`` sets the noise;
    exactly one of ``k_gap``, ``density`` sets the pilots; exactly one of
    ``jitter_ratio`` (``sigma_xi / t_s``) and ``sigma_eps`` sets the jitter.
    ``values`` holds the sweep axis, whose meaning depends on ``scenario``:
    NDR in dB (``ndr_sweep``), pilot density (``density_sweep``,
    ``mle_vs_oracle``, ``evm_pipeline``), ``sigma_xi / t_s``
    (``jitter_sweep``) or the bandlimit ``W`` in Hz (``bandwidth_sweep``).
    """

    scenario: str = "ndr_sweep"
    trials: int = 5
    seed: int = 0
    workers: int = 1
    common_random_numbers: bool = True
    out_dir: str = "results"
    # signal
    n: int = 2**16
    t_s: float = 1e-8
    w: float = 4e7
    sigma_x2: float = 1.0
    is_real: bool = True
    obs_mode: str = "exact"
    half_width: int = 512
    deriv_half_length: int = 512
    deriv_window: str = "hann"
    guard: int = 1024
    # jitter
    phi: float = 0.999
    jitter_ratio: float | None = None
    sigma_eps: float | None = None
    # noise
    sigma_w: float | None = None
    ndr_db: float | None = None
    sinadr_db: float | None = None
    # pilots
    k_gap: int | None = None
    density: float | None = None
    # polynomial method
    poly: bool = True
    poly_degree: int = 4
    poly_block: int = 500
    ridge: float = 0.0
    # Kalman smoother
    kalman: bool = True
    kalman_mode: str = "oracle"
    kf_phi: float | None = None
    kf_sigma_eps: float | None = None
    kf_sigma_w: float | None = None
    mle_starts: int = 32
    # sweep
    values: tuple = ()
    bandwidth_hold: str = "ndr"
    # symbol pipeline
    symbol_rate: float = 4e7
    oversampling: float = 3.0
    n_symbols: int = 16384
    pulse_half_width: int = 32
    # spectra
    interferer_db: float = 30.0
    interferer_lo: float = 0.25
    interferer_hi: float = 0.35
    signal_w: float = 0.1
    psd_segment: int = 4096
    gap_fill_iterations: int = 100

    def __post_init__(self):
        self.values = tuple(self.values)
        self.validate()

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        _exactly_one(self, NOISE_KEYS, "noise")
        _exactly_one(self, PILOT_KEYS, "pilot")
        _exactly_one(self, JITTER_KEYS, "jitter")
        if not 0.0 <= self.phi < 1.0:
            raise ConfigError("phi must lie in [0, 1)")
        if self.t_s <= 0 or self.w <= 0:
            raise ConfigError("t_s and w must be positive")
        if self.scenario not in ("evm_pipeline", "psd_stages") and self.w * self.t_s > 0.5:
            raise ConfigError("w exceeds the Nyquist frequency")
        if self.half_width < 64 or self.deriv_half_length < 8:
            raise ConfigError("half_width must be >= 64 and deriv_half_length >= 8")
        if 4 * self.deriv_half_length >= self.n or 2 * self.guard >= self.n:
            raise ConfigError("n too short for deriv_half_length or guard")
        if self.obs_mode not in ("exact", "linearized"):
            raise ConfigError("obs_mode must be 'exact' or 'linearized'")
        if self.kalman_mode not in KALMAN_MODES:
            raise ConfigError(f"kalman_mode must be one of {KALMAN_MODES}")
        if self.kalman_mode == "fixed" and None in (self.kf_phi, self.kf_sigma_eps, self.kf_sigma_w):
            raise ConfigError("kalman_mode = fixed needs kf_phi, kf_sigma_eps and kf_sigma_w")
        if self.bandwidth_hold not in ("ndr", "noise"):
            raise ConfigError("bandwidth_hold must be 'ndr' or 'noise'")
        if self.density is not None and not 0 < self.density <= 1:
            raise ConfigError("density must lie in (0, 1]")
        if self.scenario == "evm_pipeline":
            osr = self.oversampling
            if not (osr >= 2 and float(osr).is_integer()):
                raise ConfigError(f"oversampling must be an integer >= 2, got {osr}")
        if self.scenario == "psd_stages":
            if not 0 < self.signal_w < self.interferer_lo < self.interferer_hi <= 0.5 * 0.999:
                raise ConfigError("need 0 < signal_w < interferer_lo < interferer_hi < 1/2")
        if self.scenario in ("ndr_sweep", "density_sweep", "jitter_sweep", "bandwidth_sweep",
                             "mle_vs_oracle", "evm_pipeline") and not self.values:
            raise ConfigError(f"scenario {self.scenario} needs sweep values")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _exactly_one(cfg, keys, what):
    given = [k for k in keys if getattr(cfg, k) is not None]
    if len(given) != 1:
        raise ConfigError(f"exactly one {what} key required among {keys}, got {given or 'none'}")


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}


def _convert(name: str, raw: str):
    f = _FIELDS.get(name)
    if f is None:
        raise ConfigError(f"unknown config key {name!r}")
    text = raw.strip()
    typ = str(f.type)
    try:
        if name == "values":
            return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
        if text.lower() in ("none", ""):
            return None
        if typ.startswith("bool"):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if typ.startswith("int"):
            v = float(text)
            if not v.is_integer():
                raise ValueError(text)
            return int(v)
        if typ.startswith("float"):
            v = float(text)
            if not math.isfinite(v):
                raise ValueError(text)
            return v
        return text
    except ValueError:
        raise ConfigError(f"bad value for {name!r}: {raw!r}") from None


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Build a config from INI text, then apply ``overrides`` (key -> string)."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    kw = {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            if key in kw:
                raise ConfigError(f"key {key!r} given twice")
            kw[key] = _convert(key, raw)
    _merge(kw, overrides)
    try:
        return ExperimentConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _merge(kw: dict, overrides: dict | None) -> None:
    # an override for one noise/pilot/jitter key replaces its alternatives
    for key, raw in (overrides or {}).items():
        kw[key] = _convert(key, raw) if isinstance(raw, str) else raw
        for group in (NOISE_KEYS, PILOT_KEYS, JITTER_KEYS):
            if key in group:
                for other in group:
                    if other != key:
                        kw[other] = None


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text, overrides)


def apply_overrides(cfg: ExperimentConfig, overrides: dict) -> ExperimentConfig:
    kw = dataclasses.asdict(cfg)
    _merge(kw, overrides)
    return ExperimentConfig(**kw)


def to_ini(cfg: ExperimentConfig) -> str:
    """Serialize (flat, one section) for provenance next to results."""
    lines = ["[experiment]"]
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        if f.name == "values":
            v = ", ".join(repr(float(x)) for x in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
