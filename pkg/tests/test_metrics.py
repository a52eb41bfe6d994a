import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from nearfield import (
    AngleSearchPolicy,
    ArrayConfig,
    PolarPosition,
    array_gain_efficiency,
    e_l2_at,
    e_l2_worst,
    e_linf_at,
    e_linf_worst,
)
from nearfield.metrics import e_l2_worst_batch, e_linf_worst_batch, golden_max

RAYLEIGH_300_64 = 1.9845


def test_policy_validation():
    with pytest.raises(ValueError):
        AngleSearchPolicy(coarse_grid_points=2)
    with pytest.raises(ValueError):
        AngleSearchPolicy(refine_tolerance=0.0)
    with pytest.raises(ValueError):
        AngleSearchPolicy(refine_max_iter=0)


def test_single_element_metrics_vanish():
    cfg = ArrayConfig(carrier_freq=1e9, n_elements=1)
    pos = PolarPosition(theta=0.8, range_m=4.0)
    assert e_linf_at(cfg, pos) == 0.0
    assert e_l2_at(cfg, pos) == 0.0
    assert array_gain_efficiency(cfg, pos) == 1.0
    sample = e_linf_worst(cfg, 4.0)
    assert sample.value == 0.0 and sample.theta_star == 0.0
    assert e_l2_worst(cfg, 4.0).value == 0.0


def test_pointwise_metrics_match_complex_arithmetic(cfg300):
    for theta in (0.1, math.pi / 3, 1.56, math.pi / 2, 2.9):
        pos = PolarPosition(theta=theta, range_m=RAYLEIGH_300_64)
        assert e_linf_at(cfg300, pos) == pytest.approx(
            oracles.linf_at(cfg300, RAYLEIGH_300_64, theta), rel=1e-11
        )
        assert e_l2_at(cfg300, pos) == pytest.approx(
            oracles.l2_at(cfg300, RAYLEIGH_300_64, theta), rel=1e-11
        )
        assert array_gain_efficiency(cfg300, pos) == pytest.approx(
            oracles.eta_at(cfg300, RAYLEIGH_300_64, theta), rel=1e-10
        )


def test_metrics_vanish_in_far_field(grid_configs):
    for cfg in grid_configs:
        r = 1e6 * max(cfg.aperture, cfg.spacing)
        assert e_linf_worst(cfg, r).value < 1e-3
        assert e_l2_worst(cfg, r).value < 1e-3
        pos = PolarPosition(theta=math.pi / 2, range_m=r)
        assert array_gain_efficiency(cfg, pos) > 1 - 1e-6


def test_linf_worst_matches_dense_oracle(cfg300):
    dense_value, _ = oracles.linf_dense_max(cfg300, 56.0)
    sample = e_linf_worst(cfg300, 56.0)
    assert sample.value == pytest.approx(dense_value, rel=1e-6)
    assert 0.0 <= sample.theta_star <= math.pi


def test_linf_worst_at_rayleigh_matches_dense_oracle(cfg300):
    dense_value, dense_theta = oracles.linf_dense_max(cfg300, RAYLEIGH_300_64)
    sample = e_linf_worst(cfg300, RAYLEIGH_300_64)
    assert sample.value == pytest.approx(dense_value, rel=1e-6)
    # the dense argmax lives on (0, 2*pi); ours is its reflection into [0, pi]
    folded = min(dense_theta, 2 * math.pi - dense_theta)
    assert sample.theta_star == pytest.approx(folded, abs=5e-3)


def test_worst_search_half_interval_equals_full_interval(cfg10_5):
    # full-circle oracle vs the symmetry-reduced search grid
    for r in (0.3, 1.0, 20.0):
        dense_value, _ = oracles.linf_dense_max(cfg10_5, r, n_angles=200_000)
        assert e_linf_worst(cfg10_5, r).value == pytest.approx(dense_value, rel=1e-6)


def test_l2_worst_matches_dense_oracle(cfg300):
    dense_value, _ = oracles.l2_dense_max(cfg300, RAYLEIGH_300_64)
    assert e_l2_worst(cfg300, RAYLEIGH_300_64).value == pytest.approx(dense_value, rel=1e-6)


def test_l2_worst_near_tolerance_at_cited_radius(cfg300):
    # the l2 envelope sits essentially at 1e-3 around 1.4 km
    assert e_l2_worst(cfg300, 1422.18).value == pytest.approx(1e-3, rel=0.02)


@settings(max_examples=60, deadline=None)
@given(
    theta=st.floats(1e-6, 2 * math.pi - 1e-6),
    r=st.floats(0.5, 500.0),
    n_elements=st.integers(2, 32),
)
def test_metric_nonnegativity_and_eta_range(theta, r, n_elements):
    cfg = ArrayConfig(carrier_freq=28e9, n_elements=n_elements)
    pos = PolarPosition(theta=theta, range_m=r)
    assert e_linf_at(cfg, pos) >= 0.0
    assert e_l2_at(cfg, pos) >= 0.0
    assert 0.0 <= array_gain_efficiency(cfg, pos) <= 1.0


@settings(max_examples=40, deadline=None)
@given(
    theta=st.floats(1e-3, math.pi - 1e-3),
    r=st.floats(0.5, 200.0),
    n_elements=st.integers(2, 32),
)
def test_norm_inequality_bridge(theta, r, n_elements):
    # total mismatch never exceeds (r + aperture) times the per-element worst
    cfg = ArrayConfig(carrier_freq=10e9, n_elements=n_elements)
    pos = PolarPosition(theta=theta, range_m=r)
    bound = (r + cfg.aperture) * e_linf_at(cfg, pos)
    assert e_l2_at(cfg, pos) <= bound * (1 + 1e-12)


def test_worst_dominates_random_angles(cfg300):
    rng = np.random.default_rng(7)
    for r in (0.5, RAYLEIGH_300_64, 56.0):
        worst_linf = e_linf_worst(cfg300, r).value
        worst_l2 = e_l2_worst(cfg300, r).value
        thetas = rng.uniform(1e-6, 2 * math.pi - 1e-6, size=1000)
        # allowance for the finite coarse-grid resolution of the search
        slack = 1 + 5e-5
        for theta in thetas:
            pos = PolarPosition(theta=float(theta), range_m=r)
            assert e_linf_at(cfg300, pos) <= worst_linf * slack
            assert e_l2_at(cfg300, pos) <= worst_l2 * slack


def test_worst_value_dominates_own_grid(cfg10_5):
    # the returned maximum is no smaller than any coarse-grid sample
    from nearfield.metrics import _angle_grid, _clamped_cos, _linf_grid

    policy = AngleSearchPolicy()
    thetas = _angle_grid(policy)
    for r in (0.2, 1.7, 40.0):
        grid_values = _linf_grid(cfg10_5, np.array([r]), _clamped_cos(thetas)[None, :])[0]
        assert e_linf_worst(cfg10_5, r, policy).value >= grid_values.max()


def test_batch_matches_scalar(cfg10_5):
    rs = np.geomspace(0.2, 300.0, 37)
    bv, bt = e_linf_worst_batch(cfg10_5, rs)
    for i, r in enumerate(rs):
        sample = e_linf_worst(cfg10_5, float(r))
        assert bv[i] == sample.value
        assert bt[i] == sample.theta_star
    bv2, _ = e_l2_worst_batch(cfg10_5, rs)
    assert bv2[0] == e_l2_worst(cfg10_5, float(rs[0])).value


def test_worst_rejects_nonpositive_range(cfg10_5):
    with pytest.raises(ValueError):
        e_linf_worst(cfg10_5, 0.0)


def test_golden_max_finds_quadratic_peak():
    x, v = golden_max(lambda t: -((t - 0.3) ** 2), 0.0, 1.0, 1e-9, 200)
    assert x == pytest.approx(0.3, abs=1e-6)
    assert v == pytest.approx(0.0, abs=1e-10)


def test_eta_bias_at_rayleigh_worst_angle(cfg300):
    # at 300 GHz / 64 elements the efficiency dip at the Rayleigh range is
    # about 0.2, the estimator-floor counterpart of the ~0.45 squared mismatch
    sample = e_l2_worst(cfg300, RAYLEIGH_300_64)
    eta = array_gain_efficiency(
        cfg300, PolarPosition(theta=sample.theta_star, range_m=RAYLEIGH_300_64)
    )
    assert 0.0 < eta < 1.0
    assert 1 - eta == pytest.approx(0.2057, abs=0.01)
