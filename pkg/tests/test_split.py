import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from levyexit.noise import RngStream, characteristic_exponent, StableNoiseSpec
from levyexit.potential import ExitDomain
from levyexit.split import (
    ArrivalSchedule,
    SplitSpec,
    big_jump_exit_prob,
    intensity_beta,
    large_jump_magnitude,
    mid_jump_intensity,
    rho_gamma_feasible,
    sample_arrival_times,
    sample_large_jump,
    small_jump_cutoff_default,
    small_jump_increment,
    small_jump_variance,
    split_characteristic_check,
    substitution_variance,
)

from oracles import pareto_magnitude_cdf, truncated_levy_second_moment


def test_intensity_beta_examples():
    assert intensity_beta(1.0, 0.01, 0.5) == pytest.approx(0.2, rel=1e-12)
    assert intensity_beta(0.5, 0.04, 0.5) == pytest.approx(1.78885, rel=1e-5)
    for rho in (0.1, 0.5, 0.9):
        assert intensity_beta(1.3, 1.0, rho) == pytest.approx(2.0 / 1.3, rel=1e-12)
    with pytest.raises(ValueError):
        intensity_beta(2.5, 0.1, 0.5)
    with pytest.raises(ValueError):
        intensity_beta(1.0, -0.1, 0.5)
    with pytest.raises(ValueError):
        intensity_beta(1.0, 0.1, 1.5)


@given(
    alpha=st.floats(0.01, 1.99),
    eps=st.floats(1e-4, 10.0),
    rho=st.floats(0.01, 0.99),
)
@settings(max_examples=200, deadline=None)
def test_split_identity_beta_threshold(alpha, eps, rho):
    spec = SplitSpec(alpha=alpha, eps=eps, rho=rho)
    assert spec.beta * spec.threshold**alpha == pytest.approx(2.0 / alpha, rel=1e-12)


def test_split_spec_fields():
    spec = SplitSpec(alpha=1.0, eps=0.01, rho=0.5)
    assert spec.threshold == pytest.approx(10.0, rel=1e-12)
    assert spec.beta == pytest.approx(0.2, rel=1e-12)


def test_arrival_times_poisson_count_and_gaps():
    spec = SplitSpec(alpha=1.0, eps=0.01, rho=0.5)
    sched = sample_arrival_times(spec, 1e4, RngStream(71))
    times = np.asarray(sched.times)
    n = times.size
    assert abs(n - 2000) < 3.0 * math.sqrt(2000)
    assert np.all(np.diff(times) > 0)
    assert times[0] > 0 and times[-1] <= 1e4
    gaps = np.diff(np.concatenate([[0.0], times]))
    assert gaps.mean() == pytest.approx(5.0, abs=3.0 * 5.0 / math.sqrt(n))


def test_arrival_times_empty_at_tiny_intensity():
    spec = SplitSpec(alpha=1.0, eps=1e-8, rho=0.5)
    sched = sample_arrival_times(spec, 1.0, RngStream(72))
    assert np.asarray(sched.times).size == 0


def test_arrival_schedule_validation():
    with pytest.raises(ValueError):
        ArrivalSchedule(times=np.array([2.0, 1.0]), horizon=10.0)
    with pytest.raises(ValueError):
        ArrivalSchedule(times=np.array([1.0, 11.0]), horizon=10.0)


def test_large_jump_magnitude_examples():
    spec = SplitSpec(alpha=1.0, eps=0.01, rho=0.5)
    assert large_jump_magnitude(spec, 1.0) == spec.threshold
    assert large_jump_magnitude(spec, 0.5) == pytest.approx(20.0, rel=1e-12)
    with pytest.raises(ValueError):
        large_jump_magnitude(spec, 0.0)
    with pytest.raises(ValueError):
        large_jump_magnitude(spec, 1.5)


def test_large_jump_sign_balance_and_support():
    spec = SplitSpec(alpha=1.2, eps=0.05, rho=0.5)
    gen = RngStream(73).generator()
    ws = np.array([sample_large_jump(spec, gen).w for _ in range(100_000)])
    assert np.all(np.abs(ws) >= spec.threshold)
    assert abs(np.mean(ws > 0) - 0.5) < 0.005


def test_large_jump_pareto_ks():
    alpha = 1.0
    spec = SplitSpec(alpha=alpha, eps=0.01, rho=0.5)
    gen = RngStream(74).generator()
    mags = np.array([abs(sample_large_jump(spec, gen).w) for _ in range(100_000)])
    ks = stats.ks_1samp(
        mags, lambda w: pareto_magnitude_cdf(w, alpha, spec.threshold)
    ).statistic
    assert ks < 0.01


def test_big_jump_exit_prob_examples():
    spec = SplitSpec(alpha=1.0, eps=0.01, rho=0.5)
    bounded = ExitDomain.bounded(1.0, 1.0)
    assert big_jump_exit_prob(spec, bounded) == pytest.approx(0.1, rel=1e-12)
    half = ExitDomain.half_line(1.0)
    assert big_jump_exit_prob(spec, half) == pytest.approx(0.05, rel=1e-12)
    # equal boundaries contribute equally
    wide = ExitDomain.bounded(2.0, 2.0)
    one_side = big_jump_exit_prob(SplitSpec(alpha=1.0, eps=0.01, rho=0.5), ExitDomain.half_line(2.0))
    assert big_jump_exit_prob(spec, wide) == pytest.approx(2.0 * one_side, rel=1e-12)


def test_big_jump_exit_prob_requires_asymptotic_regime():
    # eps * threshold beyond the boundary: jumps cannot stay inside
    spec = SplitSpec(alpha=1.0, eps=2.0, rho=0.5)
    with pytest.raises(ValueError):
        big_jump_exit_prob(spec, ExitDomain.bounded(1.0, 1.0))


def test_big_jump_exit_prob_matches_monte_carlo():
    spec = SplitSpec(alpha=1.0, eps=0.01, rho=0.5)
    dom = ExitDomain.bounded(1.0, 1.0)
    p = big_jump_exit_prob(spec, dom)
    gen = RngStream(75).generator()
    n = 100_000
    hits = 0
    for _ in range(n):
        w = spec.eps * sample_large_jump(spec, gen).w
        if w > dom.a or w < -dom.b:
            hits += 1
    se = math.sqrt(p * (1.0 - p) / n)
    assert abs(hits / n - p) < 3.0 * se


def test_small_jump_increment_degenerate_modes():
    spec = SplitSpec(alpha=1.0, eps=0.01, rho=0.5)
    # stable disabled, d=0: exactly zero
    assert small_jump_increment(spec, 0.0, 1.0, RngStream(76), stable_enabled=False) == 0.0
    # stable disabled: pure N(0, eps^2 d h)
    gen = RngStream(77).generator()
    xs = np.array([small_jump_increment(spec, 4.0, 0.5, gen, stable_enabled=False)
                   for _ in range(50_000)])
    assert xs.var() == pytest.approx(spec.eps**2 * 4.0 * 0.5, rel=0.05)


def test_small_jump_variance_examples():
    spec = SplitSpec(alpha=1.0, eps=0.01, rho=0.5)
    assert small_jump_variance(spec, 0.0) == pytest.approx(2e-3, rel=1e-12)
    unit = SplitSpec(alpha=0.8, eps=1.0, rho=0.5)
    assert small_jump_variance(unit, 3.0) == pytest.approx(3.0 + 2.0 / 1.2, rel=1e-12)


def test_small_jump_variance_matches_truncated_moment_quadrature():
    for alpha in (0.6, 1.0, 1.5):
        spec = SplitSpec(alpha=alpha, eps=0.05, rho=0.5)
        expected = spec.eps**2 * (2.0 + truncated_levy_second_moment(alpha, spec.threshold))
        assert small_jump_variance(spec, 2.0) == pytest.approx(expected, rel=1e-9)


def test_small_jump_increment_empirical_variance():
    # alpha=1, eps=0.01, d=1, h=1: Var = 1e-4 * (1 + 2*10) = 2.1e-3
    spec = SplitSpec(alpha=1.0, eps=0.01, rho=0.5)
    gen = RngStream(78).generator()
    xs = np.array([small_jump_increment(spec, 1.0, 1.0, gen) for _ in range(100_000)])
    assert small_jump_variance(spec, 1.0) == pytest.approx(2.1e-3, rel=1e-12)
    assert xs.var() == pytest.approx(2.1e-3, rel=0.05)


def test_cutoff_at_threshold_leaves_no_mid_range():
    spec = SplitSpec(alpha=1.0, eps=0.01, rho=0.5)
    assert mid_jump_intensity(spec, spec.threshold) == 0.0
    # cutoff default: min(h^(1/alpha), threshold)
    assert small_jump_cutoff_default(spec, 1e-4) == pytest.approx(1e-4, rel=1e-12)
    assert small_jump_cutoff_default(spec, 1e9) == spec.threshold
    # substituted variance at full cutoff equals the whole truncated moment
    full = substitution_variance(spec.alpha, spec.threshold)
    assert spec.eps**2 * (full + 0.0) == pytest.approx(small_jump_variance(spec, 0.0), rel=1e-12)


def test_split_characteristic_check_examples():
    spec = SplitSpec(alpha=1.5, eps=0.05, rho=0.5)
    report = split_characteristic_check(spec, 1.0, (0.0, 1.0))
    assert report.passed
    assert report.max_abs_err < 1e-8
    lam0 = report.rows[0]
    assert lam0[1] == 0.0 and lam0[2] == 0.0
    # the psi_total column matches the noise module's exponent
    noise = StableNoiseSpec(alpha=1.5, d=1.0)
    lam1 = report.rows[1]
    assert lam1[3] == pytest.approx(characteristic_exponent(noise, 1.0), rel=1e-12)


def test_split_characteristic_check_stable_disabled():
    spec = SplitSpec(alpha=1.5, eps=0.05, rho=0.5)
    report = split_characteristic_check(spec, 2.0, (0.5, 1.0, 3.0), stable_enabled=False)
    assert report.passed
    for _, psi_small, psi_large, _ in report.rows:
        assert psi_large == 0.0
    assert report.rows[1][1] == -1.0  # -d*lam^2/2 at lam=1, d=2


def test_split_characteristic_check_reports_not_raises():
    spec = SplitSpec(alpha=1.0, eps=0.1, rho=0.5)
    report = split_characteristic_check(spec, 0.0, (1.0,), tol=1e-30)
    assert not report.passed
    assert report.max_abs_err > 1e-30


def test_rho_gamma_feasible_examples():
    assert rho_gamma_feasible(1.0, 0.5, 0.2)
    res = rho_gamma_feasible(1.9, 0.9, 0.04)
    assert not res
    assert any("0.005" in v for v in res.violations)
    res2 = rho_gamma_feasible(1.0, 0.5, -0.1)
    assert not res2
    assert any("positive" in v for v in res2.violations)
    res3 = rho_gamma_feasible(1.0, 1.5, 0.1)
    assert any("(0, 1)" in v for v in res3.violations)


@given(
    alpha=st.floats(0.05, 1.95),
    rho=st.floats(0.01, 0.99),
    gamma=st.floats(-0.5, 1.5),
)
@settings(max_examples=300, deadline=None)
def test_rho_gamma_feasible_matches_inequalities(alpha, rho, gamma):
    expected = (
        0.0 < rho < 1.0
        and gamma > 0.0
        and gamma < (2.0 - alpha) * (1.0 - rho) / 2.0
        and gamma > alpha * (1.0 - 2.0 * rho)
    )
    assert bool(rho_gamma_feasible(alpha, rho, gamma)) == expected
