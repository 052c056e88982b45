"""Baseline estimators: sliding window, discounted mean, constant threshold."""

import numpy as np
import pytest

from meantrack import (
    BaselineConfig,
    DetectorConfig,
    ValidationError,
    baseline_run,
    constant_threshold_run,
    discounted_mean_run,
    run,
    sliding_window_run,
)


def running_mean_predictions(x, init=0.0):
    preds = [init]
    for t in range(2, len(x) + 1):
        preds.append(np.mean(x[: t - 1]))
    return np.asarray(preds)


# ---------------------------------------------------------------------------
# sliding window


def test_sliding_window_hand_example():
    tr = sliding_window_run(np.array([1.0, 2.0, 3.0, 4.0, 0.0]), window=3)
    assert tr.predictions[4] == pytest.approx(3.0)  # mean of X_2..X_4


def test_sliding_window_width_one_predicts_last_observation():
    x = np.array([5.0, -1.0, 2.0, 7.0])
    tr = sliding_window_run(x, window=1)
    assert np.array_equal(tr.predictions[1:], x[:-1])


def test_sliding_window_covering_horizon_is_running_mean():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(50)
    tr = sliding_window_run(x, window=1000)
    np.testing.assert_allclose(tr.predictions, running_mean_predictions(x), rtol=1e-12)


def test_sliding_window_emits_no_alarms():
    tr = sliding_window_run(np.arange(20.0), window=5)
    assert tr.alarms == [] and tr.num_blocks == 1


# ---------------------------------------------------------------------------
# discounted mean


def test_discounted_mean_hand_example():
    # X = [0, 1], rho = 0.5: prediction at t=3 is (0.5*0 + 1*1) / (0.5 + 1) = 2/3
    tr = discounted_mean_run(np.array([0.0, 1.0, 9.0]), rho=0.5)
    assert tr.predictions[2] == pytest.approx(2.0 / 3.0, rel=1e-15)


def test_discounted_mean_constant_stream():
    # dyadic rho and value: the recursion stays exactly representable
    tr = discounted_mean_run(np.full(30, 3.5), rho=0.5)
    assert np.all(tr.predictions[1:] == 3.5)
    tr2 = discounted_mean_run(np.full(30, 3.5), rho=0.9)
    np.testing.assert_allclose(tr2.predictions[1:], 3.5, rtol=1e-14)


def test_discounted_mean_near_one_approaches_running_mean():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(100)
    tr = discounted_mean_run(x, rho=0.999999)
    np.testing.assert_allclose(
        tr.predictions[1:], running_mean_predictions(x)[1:], atol=1e-4
    )


def test_discounted_mean_recursion_matches_direct_weighted_sum():
    rng = np.random.default_rng(2)
    x = rng.uniform(-5, 5, size=10_000)
    rho = 0.97
    tr = discounted_mean_run(x, rho=rho)
    for t in [2, 3, 17, 500, 9_999]:
        w = rho ** np.arange(t - 2, -1, -1)
        direct = float(np.dot(w, x[: t - 1]) / w.sum())
        assert tr.predictions[t - 1] == pytest.approx(direct, rel=1e-9)


def test_discounted_mean_validates_rho():
    for rho in (0.0, 1.0, -0.5, 2.0):
        with pytest.raises(ValidationError):
            discounted_mean_run(np.ones(5), rho=rho)


# ---------------------------------------------------------------------------
# constant threshold


def test_constant_threshold_infinite_gamma_is_running_mean():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(200)
    tr = constant_threshold_run(x, gamma=np.inf, sigma=1.0)
    assert tr.alarms == []
    np.testing.assert_allclose(tr.predictions, running_mean_predictions(x), rtol=1e-12)


def test_constant_threshold_near_zero_alarms_immediately():
    x = np.random.default_rng(4).standard_normal(50)
    tr = constant_threshold_run(x, gamma=1e-12, sigma=1.0)
    assert tr.alarms[0] == 3  # the first tested step


def test_constant_threshold_same_machinery_as_tracker():
    # statistic and prediction logic are shared; only the threshold differs
    rng = np.random.default_rng(5)
    x = rng.standard_normal(300) + np.repeat([0.0, 4.0], 150)
    tr = constant_threshold_run(x, gamma=4.81, sigma=1.0)
    atc = run(x, DetectorConfig(sigma=1.0))
    tested = ~np.isnan(tr.statistics) & ~np.isnan(atc.statistics)
    first = np.flatnonzero(tested)[0]
    assert tr.statistics[first] == atc.statistics[first]
    assert np.all(tr.thresholds[tested] == 4.81)


def test_alarm_free_paths_agree_with_running_mean():
    rng = np.random.default_rng(6)
    x = rng.standard_normal(80) * 0.01  # tiny noise: no alarms anywhere
    rm = running_mean_predictions(x)
    atc = run(x, DetectorConfig(sigma=1.0))
    assert atc.alarms == []
    np.testing.assert_allclose(atc.predictions, rm, rtol=1e-12)
    sw = sliding_window_run(x, window=10_000)
    dm = discounted_mean_run(x, rho=0.9999999)
    np.testing.assert_allclose(sw.predictions, rm, rtol=1e-12)
    np.testing.assert_allclose(dm.predictions[1:], rm[1:], atol=1e-5)


def test_baseline_config_dispatch_and_validation():
    x = np.arange(10.0)
    a = baseline_run(x, BaselineConfig("sliding_window", window=3))
    b = sliding_window_run(x, window=3)
    assert np.array_equal(a.predictions, b.predictions)
    with pytest.raises(ValidationError):
        BaselineConfig("sliding_window", window=0)
    with pytest.raises(ValidationError):
        BaselineConfig("discounted_mean", rho=1.0)
    with pytest.raises(ValidationError):
        BaselineConfig("constant_threshold", gamma=0.0)
    with pytest.raises(ValidationError):
        BaselineConfig("median")
