"""Pilot-assisted compensation of AR(1) sampling-clock jitter."""

from .jitter import Ar1Params, JitterTrace, ar1_generate, make_observation
from .kalman import dejitter_kalman, kalman_forward, kalman_smooth
from .mle import MleProblem, estimate_parameters, neg_loglik_fast
from .pilots import PilotSchedule, build_schedule, k_gap_for_density, pseudo_measure
from .poly import PolyConfig, dejitter_poly
from .signals import (
    DerivativeFilterSpec,
    SampledSignal,
    bandlimited_derivative,
    generate_bandlimited_gaussian,
    gerchberg_papoulis_fill,
    resample_at_jittered_instants,
)

__version__ = "0.1.0"

__all__ = [
    "Ar1Params",
    "JitterTrace",
    "ar1_generate",
    "make_observation",
    "dejitter_kalman",
    "kalman_forward",
    "kalman_smooth",
    "MleProblem",
    "estimate_parameters",
    "neg_loglik_fast",
    "PilotSchedule",
    "build_schedule",
    "k_gap_for_density",
    "pseudo_measure",
    "PolyConfig",
    "dejitter_poly",
    "DerivativeFilterSpec",
    "SampledSignal",
    "bandlimited_derivative",
    "generate_bandlimited_gaussian",
    "gerchberg_papoulis_fill",
    "resample_at_jittered_instants",
]
