import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dejitter_lab.signals import generate_bandlimited_gaussian

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def x16():
    """Unit-power real record, N = 2^16, W T_s = 0.4, T_s = 10 ns."""
    return generate_bandlimited_gaussian(2**16, 1e-8, 4e7, 1.0, seed=11)


@pytest.fixture
def doubling_ratio():
    """Return ``f(make, n, repeats)`` giving time(make(2n)) / time(make(n)).

    ``make(n)`` prepares inputs and returns a zero-argument callable; only the
    callable is timed. Small and large runs alternate so that load bursts hit
    both, and each side keeps its best of ``repeats`` runs.
    """

    def ratio(make, n, repeats=9):
        small, large = make(n), make(2 * n)
        small()
        large()
        best_s = best_l = np.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            small()
            t1 = time.perf_counter()
            large()
            t2 = time.perf_counter()
            best_s = min(best_s, t1 - t0)
            best_l = min(best_l, t2 - t1)
        return best_l / best_s

    return ratio


@pytest.fixture(scope="session")
def jittered_record(x16):
    """Exact-model observation of ``x16``: 1.5 % jitter, phi 0.999, NDR -10 dB."""
    from dejitter_lab.jitter import (Ar1Params, ar1_generate, make_observation,
                                     sigma_eps_for_percentage)
    from dejitter_lab.metrics import sigma_w_for_ndr
    from dejitter_lab.signals import bandlimited_derivative

    sigma_eps = sigma_eps_for_percentage(1.5e-2, 0.999, x16.t_s)
    sigma_xi = sigma_eps / np.sqrt(1 - 0.999**2)
    sigma_w = sigma_w_for_ndr(-10.0, sigma_xi, 1.0, x16.bandlimit_w)
    params = Ar1Params(0.999, sigma_eps, sigma_w)
    trace = ar1_generate(params, x16.n, seed=21, t_s=x16.t_s)
    y = make_observation(x16, trace, sigma_w, "exact", seed=22)
    return {"x": x16, "y": y, "yp": bandlimited_derivative(y), "xi": trace.xi,
            "params": params}


_ACCEPTANCE_LINES = {}


@pytest.fixture
def criterion():
    """Record ``(number, passed, detail)`` for the acceptance summary."""

    def record(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(_ACCEPTANCE_LINES[number])
