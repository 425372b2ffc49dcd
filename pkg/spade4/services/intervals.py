"""
Intervalos de predicción de 95% para SPADE4 por backtesting.

Se relanza el pronosticador desde prefijos crecientes del tramo [m1, m2),
se guarda el error firmado de cada horizonte y el desvío por horizonte es
el RMS de esos errores.
"""

from typing import Optional

import numpy as np
from joblib import Parallel, delayed

from spade4.config.logging_config import log_run_event
from spade4.exceptions import DomainError, InsufficientDataError
from spade4.models import (
    BacktestResiduals,
    EmbeddingConfig,
    IntervalResult,
    RfmConfig,
    TimeSeries,
)
from spade4.services.forecaster import forecast

Z_95 = 1.96


def _prefix(data: TimeSeries, length: int) -> TimeSeries:
    return data.with_values(data.values[:length])


def _backtest_column(
    data: TimeSeries,
    length: int,
    T: int,
    cfg: Optional[EmbeddingConfig],
    rfm_cfg: Optional[RfmConfig],
) -> np.ndarray:
    predicted = forecast(_prefix(data, length), cfg, rfm_cfg, T).values
    return predicted - data.values[length : length + T]


def backtest_residuals(
    data: TimeSeries,
    m1: int,
    m2: int,
    T: int = 7,
    cfg: Optional[EmbeddingConfig] = None,
    rfm_cfg: Optional[RfmConfig] = None,
    n_jobs: int = 1,
) -> BacktestResiduals:
    """
    Matriz V (T, m2 - m1 - T) de errores de backtest.

    La columna i (0-based) compara el pronóstico lanzado desde el prefijo de
    largo ``m1 + i`` con las T observaciones siguientes. Todos los prefijos
    usan la misma semilla de base.

    Raises:
        DomainError: m1 >= m2 - T
        InsufficientDataError: la serie tiene menos de m2 muestras
    """
    if T < 1 or not 1 <= m1 < m2 - T:
        raise DomainError(f"need 1 <= m1 < m2 - T (m1={m1}, m2={m2}, T={T})")
    if data.m < m2:
        raise InsufficientDataError(f"backtesting up to m2={m2} needs {m2} samples, got {data.m}")

    n_backtests = m2 - m1 - T
    columns = Parallel(n_jobs=n_jobs)(
        delayed(_backtest_column)(data, m1 + i, T, cfg, rfm_cfg) for i in range(n_backtests)
    )
    return BacktestResiduals(V=np.column_stack(columns), m1=m1, m2=m2)


def interval_forecast(
    data: TimeSeries,
    m1: int,
    m2: int,
    T: int = 7,
    cfg: Optional[EmbeddingConfig] = None,
    rfm_cfg: Optional[RfmConfig] = None,
    z: float = Z_95,
    n_jobs: int = 1,
) -> IntervalResult:
    """
    Pronóstico desde el prefijo de largo m2 con su banda ``point -/+ z * sigma``.

    ``sigma_j`` es el RMS de los errores de horizonte j sobre todos los
    backtests. El límite inferior se trunca en 0.
    """
    if z < 0:
        raise DomainError(f"interval multiplier must be >= 0, got {z}")
    residuals = backtest_residuals(data, m1, m2, T, cfg, rfm_cfg, n_jobs)
    sigma = np.sqrt(np.mean(residuals.V**2, axis=1))
    point = forecast(_prefix(data, m2), cfg, rfm_cfg, T)

    lo = np.maximum(point.values - z * sigma, 0.0)
    hi = point.values + z * sigma
    log_run_event(
        "interval_computed",
        {"m1": m1, "m2": m2, "backtests": residuals.V.shape[1], "max_sigma": float(sigma.max())},
    )
    return IntervalResult(point=point, sigma=sigma, lo=lo, hi=hi, residuals=residuals)
