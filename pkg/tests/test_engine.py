import math
import warnings

import numpy as np
import pytest

from levyexit.engine import (
    PathParams,
    gamma_default,
    run_ensemble,
    simulate_exit_euler,
    simulate_exit_jump_adapted,
    simulate_linearization,
    tube_deviation_prob,
)
from levyexit.noise import RngStream, StableNoiseSpec
from levyexit.potential import ExitDomain, flow, harmonic_quartic, quadratic
from levyexit.split import SplitSpec


def _quiet_zero_noise():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return StableNoiseSpec(alpha=1.0, d=0.0, stable_enabled=False)


def test_gamma_default_examples():
    assert gamma_default(1.0) == pytest.approx(0.2, rel=1e-12)
    assert gamma_default(0.5) == pytest.approx(0.3, rel=1e-12)
    assert 0.0 < gamma_default(1.99) < 0.01
    with pytest.raises(ValueError):
        gamma_default(2.5)


def test_path_params_validation():
    split = SplitSpec(alpha=1.0, eps=0.1)
    with pytest.raises(ValueError):
        PathParams(eps=-0.1, h=0.01, t_max=1.0)
    with pytest.raises(ValueError):
        PathParams(eps=0.1, h=0.0, t_max=1.0)
    with pytest.raises(ValueError):
        PathParams(eps=0.1, h=0.01, t_max=1.0, scheme="leapfrog")
    with pytest.raises(ValueError):
        PathParams(eps=0.1, h=0.01, t_max=1.0, scheme="jump_adapted")
    with pytest.raises(ValueError):
        PathParams(eps=0.2, h=0.01, t_max=1.0, split=split)
    # coarse grid against the arrival rate warns
    fat = SplitSpec(alpha=1.0, eps=10.0)
    with pytest.warns(UserWarning):
        PathParams(eps=10.0, h=0.05, t_max=1.0, scheme="jump_adapted", split=fat)


def test_zero_noise_reduction_both_schemes():
    p = quadratic(1.0)
    dom = ExitDomain.bounded(1.0, 1.0)
    noise = _quiet_zero_noise()
    split = SplitSpec(alpha=1.0, eps=0.1)
    for t_max in (0.25, 1.0, 3.0):
        target = flow(p, 0.5, t_max)
        pp = PathParams(eps=0.1, h=1e-3, t_max=t_max, split=split, x0=0.5)
        rec = simulate_exit_euler(p, dom, noise, pp, RngStream(1))
        assert rec.censored and rec.n_large_jumps == 0
        assert abs(rec.exit_position - target) < 1e-6
        ppj = PathParams(
            eps=0.1, h=1e-3, t_max=t_max, scheme="jump_adapted", split=split, x0=0.5
        )
        recj = simulate_exit_jump_adapted(p, dom, noise, ppj, RngStream(1))
        assert recj.censored and recj.n_large_jumps == 0
        assert abs(recj.exit_position - target) < 1e-6


def test_start_outside_domain_exits_immediately():
    p = quadratic(1.0)
    dom = ExitDomain.bounded(1.0, 1.0)
    noise = _quiet_zero_noise()
    pp = PathParams(eps=0.1, h=0.01, t_max=1.0, x0=1.5)
    rec = simulate_exit_euler(p, dom, noise, pp, RngStream(2))
    assert rec.exit_time == 0.0
    assert rec.exit_position == 1.5
    assert not rec.censored


def test_drift_substepping_survives_far_tail():
    # deep in the quartic tail the naive explicit step would blow up
    p = harmonic_quartic(1.0, 1.0)
    dom = ExitDomain.half_line(1.0)
    noise = _quiet_zero_noise()
    pp = PathParams(eps=0.1, h=0.01, t_max=2.0, x0=-50.0)
    rec = simulate_exit_euler(p, dom, noise, pp, RngStream(3))
    assert rec.censored and not rec.clamped
    assert abs(rec.exit_position - flow(p, -50.0, 2.0)) < 1e-3


def test_determinism_and_worker_invariance():
    p = quadratic(1.0)
    dom = ExitDomain.bounded(1.0, 1.0)
    noise = StableNoiseSpec(alpha=1.0, d=1.0)
    split = SplitSpec(alpha=1.0, eps=0.1)
    pp = PathParams(eps=0.1, h=0.01, t_max=100.0, split=split)
    serial = run_ensemble(p, dom, noise, pp, 64, RngStream(9), workers=1)
    threaded = run_ensemble(p, dom, noise, pp, 64, RngStream(9), workers=4)
    assert serial == threaded
    assert [r.stream_id for r in serial] == list(range(64))
    # repeat call bit-identical
    again = run_ensemble(p, dom, noise, pp, 64, RngStream(9), workers=2)
    assert serial == again


def test_exit_record_invariants():
    p = quadratic(1.0)
    dom = ExitDomain.bounded(1.0, 1.0)
    noise = StableNoiseSpec(alpha=1.0, d=1.0)
    split = SplitSpec(alpha=1.0, eps=0.1)
    for scheme in ("euler", "jump_adapted"):
        pp = PathParams(eps=0.1, h=0.01, t_max=100.0, scheme=scheme, split=split)
        records = run_ensemble(p, dom, noise, pp, 300, RngStream(10))
        assert any(r.exited_at_large_jump for r in records)
        for r in records:
            assert r.exit_time <= pp.t_max + 1e-12
            if r.censored:
                assert dom.contains(r.exit_position)
            else:
                assert not dom.contains(r.exit_position)
            if r.exited_at_large_jump:
                assert r.pre_jump_position is not None
                assert dom.contains(r.pre_jump_position)
                assert r.n_large_jumps >= 1
            else:
                assert r.pre_jump_position is None


def test_censoring_rare_at_generous_horizon():
    p = quadratic(1.0)
    dom = ExitDomain.bounded(1.0, 1.0)
    noise = StableNoiseSpec(alpha=1.0, d=1.0)
    split = SplitSpec(alpha=1.0, eps=0.1)
    # theory mean is 5; 20x it censors far less than 1% of paths
    pp = PathParams(eps=0.1, h=0.01, t_max=100.0, split=split)
    records = run_ensemble(p, dom, noise, pp, 500, RngStream(11))
    assert sum(r.censored for r in records) / len(records) < 0.01


def test_linearization_zero_noise_is_zero():
    p = quadratic(1.0)
    split = SplitSpec(alpha=1.0, eps=0.1)
    sample = simulate_linearization(
        p, 0.0, split, 0.0, 0.01, 5.0, RngStream(12), stable_enabled=False
    )
    assert np.all(sample.values == 0.0)
    assert sample.times[0] == 0.0 and sample.times[-1] >= 5.0


def test_linearization_ou_stationary_variance():
    # x=0, quadratic(1), Gaussian-only: OU with stationary variance d/(2M)
    p = quadratic(1.0)
    split = SplitSpec(alpha=1.0, eps=0.1)
    d, h = 1.0, 0.01
    chunks = []
    for i in range(100):
        sample = simulate_linearization(
            p, 0.0, split, d, h, 100.0, RngStream(13, i), stable_enabled=False
        )
        vals = np.asarray(sample.values)
        keep = np.asarray(sample.times) > 10.0
        chunks.append(vals[keep][::100])  # thin to ~decorrelated spacing
    xs = np.concatenate(chunks)
    assert xs.var() == pytest.approx(d / 2.0, rel=0.05)


def test_linearization_response_bounded_by_driver():
    p = quadratic(1.0)
    split = SplitSpec(alpha=1.0, eps=0.05)
    ratios = []
    for i in range(40):
        z, xi = simulate_linearization(
            p, 0.0, split, 1.0, 0.01, 20.0, RngStream(14, i), return_driver=True
        )
        sup_z = np.max(np.abs(z.values))
        sup_xi = np.max(np.abs(xi.values))
        assert sup_xi > 0
        ratios.append(sup_z / sup_xi)
    ratios = np.asarray(ratios)
    assert np.max(ratios) < 3.0
    # the fitted bound is stable across disjoint batches
    assert 0.5 < np.max(ratios[:20]) / np.max(ratios[20:]) < 2.0


def test_linearization_from_off_center_start():
    # a(t) follows the flow's curvature; for the quartic well it relaxes
    # towards M and the response stays finite
    p = harmonic_quartic(1.0, 1.0)
    split = SplitSpec(alpha=1.0, eps=0.05)
    sample = simulate_linearization(p, 0.9, split, 1.0, 0.01, 10.0, RngStream(15))
    assert np.all(np.isfinite(sample.values))


def test_tube_deviation_zero_noise():
    p = quadratic(1.0)
    split = SplitSpec(alpha=1.0, eps=0.1)
    pp = PathParams(eps=0.1, h=0.01, t_max=1.0, split=split)
    est = tube_deviation_prob(
        p, 0.0, split, 0.0, 1.0, pp, 50, RngStream(16), stable_enabled=False
    )
    assert est.estimate == 0.0
    assert est.n_exceed == 0
    assert est.level == pytest.approx(1.0 * 0.1**0.2, rel=1e-12)


def test_tube_deviation_estimate_sane():
    p = quadratic(1.0)
    split = SplitSpec(alpha=0.5, eps=0.1)
    pp = PathParams(eps=0.1, h=0.01, t_max=1.0, split=split)
    est = tube_deviation_prob(p, 0.0, split, 1.0, 1.0, pp, 400, RngStream(17))
    assert 0.0 <= est.ci_low <= est.estimate <= est.ci_high <= 1.0
    assert est.n_paths == 400
    with pytest.raises(ValueError):
        tube_deviation_prob(p, 0.0, split, 1.0, -1.0, pp, 10, RngStream(17))
    with pytest.raises(ValueError):
        tube_deviation_prob(p, 0.0, split, 1.0, 1.0, pp, 0, RngStream(17))
