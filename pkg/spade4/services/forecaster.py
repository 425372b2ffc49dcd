"""
Pronosticador SPADE4.

``fit`` aprende el campo vectorial f(h) ~ ydot a partir de vectores de
retardos y ``predict`` lo integra hacia adelante con pasos de Euler,
reutilizando los pronósticos previos dentro de los vectores de retardo.
"""

from typing import Optional

import numpy as np
from loguru import logger

from spade4.config.logging_config import log_run_event
from spade4.exceptions import DivergenceError, DomainError, InsufficientDataError
from spade4.models import (
    EmbeddingConfig,
    ForecastResult,
    RfmConfig,
    Spade4Model,
    TimeSeries,
)
from spade4.services.embedding import (
    build_delay_dataset,
    delay_vector,
    estimate_derivative,
    smooth_derivative,
)
from spade4.services.rfm import feature_matrix, sample_basis, select_lambda

DEFAULT_HORIZON = 7


def derivative_targets(train: TimeSeries, cfg: EmbeddingConfig) -> np.ndarray:
    """Derivada estimada, suavizada cuando ``cfg.smooth_s > 1``."""
    d = estimate_derivative(train)
    if cfg.smooth_s > 1:
        d = smooth_derivative(d, cfg.smooth_s, centered=cfg.centered_smoothing)
    return d


def fit(
    train: TimeSeries,
    cfg: Optional[EmbeddingConfig] = None,
    rfm_cfg: Optional[RfmConfig] = None,
) -> Spade4Model:
    """
    Ajustar el modelo sobre las m muestras de entrenamiento.

    Args:
        train: Serie de entrenamiento (normalizada)
        cfg: Embedding; por defecto p = 9, tau = 1, sin suavizado
        rfm_cfg: Random features; por defecto N = 50m y la grilla de lambda estándar

    Returns:
        Spade4Model: base, coeficientes y la cola de la serie para arrancar el rollout

    Raises:
        InsufficientDataError: m < span + 1
    """
    cfg = cfg or EmbeddingConfig()
    rfm_cfg = rfm_cfg or RfmConfig()
    if train.m < cfg.span + 1:
        raise InsufficientDataError(
            f"SPADE4 with p={cfg.p}, tau={cfg.tau} needs at least {cfg.span + 1} "
            f"samples, got {train.m}"
        )

    dataset = build_delay_dataset(train, cfg, derivative_targets(train, cfg))
    n_features = rfm_cfg.resolve_n_features(train.m)
    basis = sample_basis(cfg.p, n_features, rfm_cfg.seed, rfm_cfg.activation)
    A = feature_matrix(basis, dataset.inputs)
    lam, coeffs = select_lambda(
        A,
        dataset.targets,
        rfm_cfg.lambda_grid,
        tol=rfm_cfg.tol,
        max_iter=rfm_cfg.max_iter,
        scaled=rfm_cfg.scaled_objective,
        n_jobs=rfm_cfg.n_jobs,
        warm_start=rfm_cfg.warm_start,
    )

    log_run_event(
        "spade4_fit",
        {
            "m": train.m,
            "p": cfg.p,
            "n_features": n_features,
            "lambda": lam,
            "nnz": coeffs.nnz,
            "converged": coeffs.converged,
        },
    )
    return Spade4Model(
        basis=basis,
        coeffs=coeffs,
        cfg=cfg,
        train_tail=train.values[-cfg.span :],
        dt=train.dt,
        origin_day=train.last_day,
    )


def vector_field(model: Spade4Model, h: np.ndarray) -> float:
    """f(h) = sum_j c_j phi(<h, w_j> + b_j)."""
    return float(feature_matrix(model.basis, h) @ model.coeffs.c)


def predict(model: Spade4Model, T: int = DEFAULT_HORIZON) -> ForecastResult:
    """
    Rollout de Euler de T pasos, truncado en 0.

    Raises:
        DivergenceError: un pronóstico no finito; ``step`` indica cuál (1-based)
    """
    if T < 1:
        raise DomainError(f"horizon must be >= 1, got {T}")
    history = list(model.train_tail)
    values = np.empty(T)
    for i in range(T):
        slope = vector_field(model, delay_vector(np.asarray(history), model.cfg))
        nxt = history[-1] + model.dt * slope
        if not np.isfinite(nxt):
            raise DivergenceError(f"non-finite forecast at step {i + 1}", step=i + 1)
        values[i] = max(nxt, 0.0)
        history.append(values[i])

    logger.debug(f"Rolled out {T} steps from day {model.origin_day}")
    return ForecastResult(
        horizon_days=T,
        values=values,
        start_day=model.origin_day + model.dt,
        dt=model.dt,
        method="spade4",
        model_handle=model,
    )


def forecast(
    train: TimeSeries,
    cfg: Optional[EmbeddingConfig] = None,
    rfm_cfg: Optional[RfmConfig] = None,
    T: int = DEFAULT_HORIZON,
) -> ForecastResult:
    """``predict(fit(train, cfg, rfm_cfg), T)``."""
    return predict(fit(train, cfg, rfm_cfg), T)
