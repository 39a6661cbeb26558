import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dejitter_lab.pilots import (
    DERIV_FLOOR_REL,
    build_schedule,
    k_gap_for_density,
    pseudo_measure,
)
from dejitter_lab.signals import SampledSignal


def test_small_schedule_zero_based():
    s = build_schedule(11, 4, 2)
    np.testing.assert_array_equal(s.indices, [0, 5, 10])
    assert [b.tolist() for b in s.blocks] == [[0, 5], [5, 10]]


def test_one_percent_density():
    s = build_schedule(2**18, 99)
    assert s.density == pytest.approx(0.01, rel=0.01)
    assert k_gap_for_density(0.01) == 99


def test_enumeration_hundred():
    s = build_schedule(100, 4, 5)
    assert s.indices.size == 20
    assert s.n_blocks == 5
    for a, b in zip(s.blocks, s.blocks[1:]):
        assert a[-1] == b[0]
    assert s.blocks[-1].size >= 2


def test_density_count_formula():
    # full blocks: pilot count is L (C - 1) + 1
    s = build_schedule(4 * 9 * 10 + 1, 9, 5)
    n_pilots = s.n_blocks * (5 - 1) + 1
    assert s.indices.size == n_pilots
    assert s.density == pytest.approx(n_pilots / s.n_total)


@pytest.mark.parametrize("kw", [dict(block_size=1), dict(k_gap=-1), dict(n_total=0)])
def test_rejects(kw):
    args = dict(n_total=100, k_gap=4, block_size=5)
    args.update(kw)
    with pytest.raises(ValueError):
        build_schedule(**args)


@pytest.mark.parametrize("d", [0.0, -0.1, 1.5])
def test_density_range(d):
    with pytest.raises(ValueError):
        k_gap_for_density(d)


@given(n=st.integers(2, 5000), k=st.integers(0, 60), c=st.integers(2, 40))
def test_block_cover(n, k, c):
    s = build_schedule(n, k, c)
    counts = {}
    for b in s.blocks:
        for i in b:
            counts[int(i)] = counts.get(int(i), 0) + 1
    assert sorted(counts) == s.indices.tolist()
    shared = {int(b[0]) for b in s.blocks[1:]}
    for i, cnt in counts.items():
        assert cnt == (2 if i in shared else 1)
    assert np.all(np.diff(s.indices) == k + 1)
    assert all(b.size <= c for b in s.blocks)
    mask = s.mask()
    assert mask.sum() == s.indices.size


def _sig(v):
    return SampledSignal(np.asarray(v, dtype=float), 1.0, 0.5)


def test_noiseless_linearized_recovers_jitter(rng):
    n = 400
    x = rng.standard_normal(n)
    xp = rng.standard_normal(n) + 3.0
    xi = rng.normal(0, 1e-3, n)
    y = x + xi * xp
    s = build_schedule(n, 3, 10)
    m = pseudo_measure(_sig(y), _sig(xp), x, s)
    np.testing.assert_allclose(m.m, xi[s.indices], rtol=1e-10)
    assert m.n_flagged == 0


def test_conditional_variance(rng):
    xp = np.array([0.5, 1.0, 2.0, 4.0])
    sigma_w = 0.1
    sched = build_schedule(4, 0, 4)
    trials = 10_000
    w = rng.normal(0, sigma_w, (trials, 4))
    est = np.array([pseudo_measure(_sig(w[t]), _sig(xp), np.zeros(4), sched).m
                    for t in range(trials)])
    np.testing.assert_allclose(est.var(axis=0), sigma_w**2 / xp**2, rtol=0.05)


def test_flagging_below_floor():
    n = 50
    xp = np.ones(n)
    xp[10] = 1e-6
    sched = build_schedule(n, 4, 5)
    m = pseudo_measure(_sig(np.ones(n)), _sig(xp), np.zeros(n), sched)
    assert m.n_flagged == 1
    assert not m.reliable[2]
    assert m.m[2] == 0.0
    assert m.floor == pytest.approx(DERIV_FLOOR_REL * np.sqrt(np.mean(xp**2)))


def test_complex_least_squares_real_part(rng):
    n = 64
    xp = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    r = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    sched = build_schedule(n, 0, 8)
    y = SampledSignal(r, 1.0, 0.5, False)
    yp = SampledSignal(xp, 1.0, 0.5, False)
    m = pseudo_measure(y, yp, np.zeros(n), sched)
    np.testing.assert_allclose(m.m, np.real(r * np.conj(xp)) / np.abs(xp) ** 2)
    # it minimizes |xi y' - r| over real xi
    bumped = np.abs((m.m + 1e-4) * xp - r)
    assert np.all(np.abs(m.m * xp - r) <= bumped + 1e-15)


def test_pilot_values_shape_checked(rng):
    sched = build_schedule(40, 3)
    with pytest.raises(ValueError):
        pseudo_measure(_sig(np.zeros(40)), _sig(np.ones(40)), np.zeros(7), sched)


@given(scale=st.floats(1e-6, 1e6) | st.floats(-1e6, -1e-6), seed=st.integers(0, 1000))
def test_scale_equivariance(scale, seed):
    rng = np.random.default_rng(seed)
    n = 120
    x = rng.standard_normal(n)
    r = rng.standard_normal(n)
    yp = rng.standard_normal(n)
    sched = build_schedule(n, 2, 10)
    a = pseudo_measure(_sig(x + r), _sig(yp), x, sched)
    b = pseudo_measure(_sig(x + scale * r), _sig(scale * yp), x, sched)
    # forming x + scale * r and subtracting x again costs ~eps / |scale|
    tol = 1e-12 * max(1.0, 1.0 / abs(scale))
    np.testing.assert_allclose(a.m, b.m, rtol=tol, atol=tol * np.max(np.abs(a.m)))
    np.testing.assert_array_equal(a.reliable, b.reliable)
