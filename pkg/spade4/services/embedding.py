"""
Embedding por retardos.

Derivada por diferencias finitas, filtro de suavizado por convolución y
construcción de los pares (h_k, ydot(t_k)) que alimentan la regresión.
"""

from typing import Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from spade4.exceptions import DimensionMismatchError, DomainError, InsufficientDataError
from spade4.models import DelayDataset, EmbeddingConfig, TimeSeries


def estimate_derivative(s: TimeSeries) -> np.ndarray:
    """
    Derivada de la observable en cada muestra.

    Diferencia hacia adelante en la primera muestra, centrada en el interior
    y hacia atrás en la última, cada una dividida por su intervalo de tiempo.

    Raises:
        InsufficientDataError: menos de dos muestras
    """
    if s.m < 2:
        raise InsufficientDataError(f"derivative needs at least 2 samples, got {s.m}")
    return np.gradient(s.values, s.dt)


def smooth_derivative(d: Sequence[float], s: int, centered: bool = False) -> np.ndarray:
    """
    Promedio móvil de ``s`` términos sobre la derivada, con relleno de ceros.

    La ventana por defecto es ``[k+2-s, k+1]``: incluye la muestra siguiente,
    por lo que con ``s = 1`` el resultado es la derivada corrida un lugar a la
    izquierda con un cero al final. Con ``centered=True`` la ventana se centra
    en k y ``s = 1`` es la identidad.

    Args:
        d: Derivada estimada (largo m)
        s: Largo de la ventana
        centered: Usar la ventana centrada

    Returns:
        np.ndarray: Derivada suavizada, mismo largo que ``d``
    """
    if s < 1:
        raise DomainError(f"smoothing strength must be >= 1, got {s}")
    d = np.asarray(d, dtype=float)
    m = d.size
    full = np.convolve(np.append(d, 0.0), np.ones(s), mode="full")
    offset = s // 2 if centered else 1
    return full[offset : offset + m] / s


def delay_vector(values: np.ndarray, cfg: EmbeddingConfig) -> np.ndarray:
    """Vector de retardos de las últimas ``cfg.span`` muestras, la más nueva primero."""
    values = np.asarray(values, dtype=float)
    if values.size < cfg.span:
        raise InsufficientDataError(
            f"delay vector needs {cfg.span} samples, got {values.size}"
        )
    return values[-cfg.span :][::-1][:: cfg.tau]


def build_delay_dataset(
    s: TimeSeries, cfg: EmbeddingConfig, targets: Optional[Sequence[float]] = None
) -> DelayDataset:
    """
    Armar los pares de entrenamiento para k = span..m.

    Con tau = 1 la fila j es ``[y(t_k), y(t_{k-1}), ..., y(t_{k-p+1})]`` y
    hay ``m - p + 1`` filas.

    Args:
        s: Serie observada
        cfg: Dimensión y retardo del embedding
        targets: Derivada por muestra (largo m); si falta se estima sin suavizar

    Raises:
        InsufficientDataError: la serie no alcanza para un vector de retardos
        DimensionMismatchError: ``targets`` no tiene largo m
    """
    if s.m < cfg.span:
        raise InsufficientDataError(
            f"embedding p={cfg.p}, tau={cfg.tau} needs {cfg.span} samples, got {s.m}"
        )
    if targets is None:
        targets = estimate_derivative(s)
    targets = np.asarray(targets, dtype=float)
    if targets.shape != (s.m,):
        raise DimensionMismatchError(
            f"expected {s.m} derivative targets, got {targets.size}"
        )

    windows = sliding_window_view(s.values, cfg.span)[:, ::-1][:, :: cfg.tau]
    return DelayDataset(
        inputs=windows,
        targets=targets[cfg.span - 1 :],
        k_start=cfg.span,
        k_end=s.m,
    )
