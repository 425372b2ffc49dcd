"""
Tests de los intervalos de predicción por backtesting.
"""
import numpy as np
import pytest
from pydantic import ValidationError

from spade4.exceptions import DomainError, InsufficientDataError
from spade4.models import BacktestResiduals, EmbeddingConfig, TimeSeries
from spade4.services.forecaster import forecast
from spade4.services.intervals import backtest_residuals, interval_forecast


def test_single_backtest_column(fast_rfm):
    data = TimeSeries(values=np.full(20, 0.5))
    residuals = backtest_residuals(data, 10, 18, 7, EmbeddingConfig(p=3), fast_rfm)
    assert residuals.V.shape == (7, 1)


def test_constant_series_has_zero_width(fast_rfm):
    data = TimeSeries(values=np.full(24, 0.5))
    result = interval_forecast(data, 8, 20, 7, EmbeddingConfig(p=3), fast_rfm)
    np.testing.assert_allclose(result.residuals.V, 0.0, atol=1e-15)
    np.testing.assert_allclose(result.sigma, 0.0, atol=1e-15)
    np.testing.assert_allclose(result.lo, result.point.values)
    np.testing.assert_allclose(result.hi, result.point.values)


def test_band_is_rms_of_backtests(synthetic_truth, fast_rfm):
    data = synthetic_truth.with_values(synthetic_truth.values[:72])
    result = interval_forecast(data, 60, 70, 7, EmbeddingConfig(), fast_rfm)
    V = result.residuals.V
    assert V.shape == (7, 3)
    np.testing.assert_allclose(result.sigma, np.sqrt(np.mean(V**2, axis=1)))
    np.testing.assert_allclose(result.hi - result.point.values, 1.96 * result.sigma)
    assert np.all(result.lo >= 0)
    assert np.all(result.point.values - result.lo <= 1.96 * result.sigma + 1e-12)
    assert result.point.start_day == 70.0


def test_backtest_columns_use_growing_prefixes(synthetic_truth, fast_rfm):
    data = synthetic_truth.with_values(synthetic_truth.values[:70])
    residuals = backtest_residuals(data, 55, 64, 7, EmbeddingConfig(), fast_rfm)
    prefix = data.with_values(data.values[:56])
    expected = forecast(prefix, EmbeddingConfig(), fast_rfm, 7).values - data.values[56:63]
    np.testing.assert_allclose(residuals.V[:, 1], expected)


def test_bad_backtest_range():
    data = TimeSeries(values=np.ones(30))
    with pytest.raises(DomainError):
        backtest_residuals(data, 20, 27, 7)
    with pytest.raises(DomainError):
        interval_forecast(data, 10, 20, 7, z=-1.0)


def test_series_shorter_than_m2():
    with pytest.raises(InsufficientDataError):
        backtest_residuals(TimeSeries(values=np.ones(15)), 5, 20, 7)


def test_residual_matrix_shape_rules():
    residuals = BacktestResiduals(V=np.zeros((7, 13)), m1=80, m2=100)
    assert residuals.V.shape == (7, 13)
    with pytest.raises(ValidationError):
        BacktestResiduals(V=np.zeros((7, 12)), m1=80, m2=100)
