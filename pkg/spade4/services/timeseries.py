"""
Series de tiempo: ingesta CSV, preprocesamiento y métrica de evaluación.

Funciones principales:
- load_csv() / write_csv(): formato ``day,value`` con un header
- seven_day_average(): promedio móvil trailing de 7 días
- normalize() / denormalize(): división por ``c*P`` y su inversa
- inject_noise(): ruido gaussiano escalado por el máximo de la serie
- extract_window(): recorte de una ola con t0 reiniciado a 0
- train_holdout_split(): primeras m muestras y las T siguientes
- relative_error(): error relativo en norma 2 sobre el horizonte

Todas las funciones son puras; la aleatoriedad entra solo por semillas explícitas.
"""

import os
import re
import tempfile
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from spade4.exceptions import (
    DimensionMismatchError,
    EmptySeriesError,
    InvalidSamplingError,
    MalformedRowError,
    MissingFileError,
    NonNumericValueError,
    NonUniformStepError,
    WindowError,
    ZeroDenominatorError,
)
from spade4.models import NoiseSpec, NormalizationSpec, TimeSeries

CSV_HEADER = ("day", "value")
AVERAGE_WINDOW_DAYS = 7

SeriesLike = Union[TimeSeries, np.ndarray, list, tuple]

_LINE_IN_PARSER_ERROR = re.compile(r"line (\d+)")


def load_csv(path: Union[str, Path]) -> TimeSeries:
    """
    Leer una serie desde un CSV ``day,value``.

    Args:
        path: Ruta del archivo (UTF-8, LF o CRLF)

    Returns:
        TimeSeries: t0 = primer día, dt = paso observado, valores en orden

    Raises:
        MissingFileError: El archivo no existe
        MalformedRowError: Header inválido o fila con más/menos de dos campos
        NonNumericValueError: Día no entero o valor no numérico
        NonUniformStepError: Los días no avanzan con paso constante positivo
        EmptySeriesError: Solo hay header
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"series file not found: {path}")

    try:
        frame = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
            skip_blank_lines=True,
            encoding="utf-8-sig",
        )
    except pd.errors.EmptyDataError as exc:
        raise MalformedRowError("missing 'day,value' header", line=1) from exc
    except pd.errors.ParserError as exc:
        match = _LINE_IN_PARSER_ERROR.search(str(exc))
        line = int(match.group(1)) if match else None
        raise MalformedRowError("expected exactly two fields", line=line) from exc

    header = tuple(str(col).strip().lower() for col in frame.columns)
    if header != CSV_HEADER:
        raise MalformedRowError(
            f"expected header 'day,value', found '{','.join(frame.columns)}'", line=1
        )
    if frame.empty:
        raise EmptySeriesError(f"no observations in {path}")

    days = np.empty(len(frame), dtype=np.int64)
    values = np.empty(len(frame), dtype=float)
    for idx, (day_text, value_text) in enumerate(
        zip(frame["day"], frame["value"])
    ):
        line = idx + 2
        if pd.isna(day_text) or pd.isna(value_text) or value_text == "":
            raise MalformedRowError("expected exactly two fields", line=line)
        try:
            days[idx] = int(day_text.strip())
        except ValueError as exc:
            raise NonNumericValueError(
                f"day '{day_text}' is not an integer", line=line
            ) from exc
        try:
            values[idx] = float(value_text.strip())
        except ValueError as exc:
            raise NonNumericValueError(
                f"value '{value_text}' is not numeric", line=line
            ) from exc

    if days.size > 1:
        steps = np.diff(days)
        step = int(steps[0])
        if step <= 0:
            raise NonUniformStepError("days must be strictly increasing", line=3)
        bad = np.flatnonzero(steps != step)
        if bad.size:
            raise NonUniformStepError(
                f"day step changes from {step} to {int(steps[bad[0]])}",
                line=int(bad[0]) + 3,
            )
    else:
        step = 1

    logger.debug(f"Loaded {days.size} samples from {path} (t0={days[0]}, dt={step})")
    return TimeSeries(t0=float(days[0]), dt=float(step), values=values)


def _format_day(day: float) -> str:
    return str(int(round(day))) if float(day).is_integer() else repr(float(day))


def write_csv(series: TimeSeries, path: Union[str, Path]) -> Path:
    """
    Escribir la serie en el formato estándar de forma atómica.

    Se escribe a un temporal en el mismo directorio y luego se renombra,
    así un lector nunca ve un archivo a medio escribir.

    Returns:
        Path: Ruta final del archivo
    """
    frame = pd.DataFrame(
        {
            "day": [_format_day(day) for day in series.days],
            "value": series.values,
        }
    )
    return write_frame_atomic(frame, path)


def write_frame_atomic(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """Escribir un DataFrame como CSV con write-then-rename."""
    text = frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")
    return write_text_atomic(text, path)


def write_text_atomic(text: str, path: Union[str, Path]) -> Path:
    """Escribir texto UTF-8 a un temporal del mismo directorio y renombrarlo."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def seven_day_average(s: TimeSeries) -> TimeSeries:
    """
    Promedio trailing de 7 días, truncado al inicio de la serie.

    ``values'_k = mean(values[max(1, k-6)..k])``; el largo no cambia.

    Raises:
        InvalidSamplingError: Si dt != 1 día
    """
    if s.dt != 1.0:
        raise InvalidSamplingError(f"seven-day average needs dt = 1 day, got {s.dt}")
    averaged = (
        pd.Series(s.values)
        .rolling(window=AVERAGE_WINDOW_DAYS, min_periods=1)
        .mean()
        .to_numpy()
    )
    return s.with_values(averaged)


def normalize(s: TimeSeries, n: NormalizationSpec) -> TimeSeries:
    """Dividir toda la serie por ``population * scale_fraction``."""
    return s.with_values(s.values / n.divisor)


def denormalize(s: TimeSeries, n: NormalizationSpec) -> TimeSeries:
    """Inversa exacta de ``normalize``."""
    return s.with_values(s.values * n.divisor)


def inject_noise(s: TimeSeries, spec: NoiseSpec) -> TimeSeries:
    """
    Agregar ruido ``eps_k * max|values|`` con ``eps_k ~ N(0, eta)`` i.i.d.

    ``eta`` es el desvío estándar; la salida es determinística dada la semilla.
    """
    if spec.eta == 0:
        return s
    rng = np.random.default_rng(spec.seed)
    eps = rng.normal(loc=0.0, scale=spec.eta, size=s.m)
    return s.with_values(s.values + eps * np.max(np.abs(s.values)))


def extract_window(s: TimeSeries, start_day: float, end_day: float) -> TimeSeries:
    """
    Recortar la subserie ``[start_day, end_day]`` (inclusive).

    El t0 del resultado se reinicia a 0 para que los tamaños de entrenamiento
    m se cuenten desde el inicio de la ola.

    Raises:
        WindowError: start_day > end_day o límites fuera del rango de la serie
    """
    if start_day > end_day:
        raise WindowError(f"window start {start_day} is after end {end_day}")
    if start_day < s.t0 or end_day > s.last_day:
        raise WindowError(
            f"window [{start_day}, {end_day}] outside series range "
            f"[{s.t0}, {s.last_day}]"
        )
    first = int(np.ceil((start_day - s.t0) / s.dt - 1e-9))
    last = int(np.floor((end_day - s.t0) / s.dt + 1e-9))
    if last < first:
        raise WindowError(f"window [{start_day}, {end_day}] contains no samples")
    return TimeSeries(t0=0.0, dt=s.dt, values=s.values[first : last + 1])


def train_holdout_split(
    s: TimeSeries, m: int, horizon: int
) -> Tuple[TimeSeries, TimeSeries]:
    """
    Separar las primeras m muestras y las ``horizon`` siguientes.

    Raises:
        WindowError: Si no hay ``m + horizon`` muestras
    """
    if m < 1 or horizon < 1 or m + horizon > s.m:
        raise WindowError(
            f"cannot split {s.m} samples into m={m} training and {horizon} held-out"
        )
    train = s.with_values(s.values[:m])
    holdout = TimeSeries(t0=s.t0 + m * s.dt, dt=s.dt, values=s.values[m : m + horizon])
    return train, holdout


def _as_vector(x: SeriesLike) -> np.ndarray:
    if isinstance(x, TimeSeries):
        return x.values
    return np.asarray(x, dtype=float).ravel()


def relative_error(truth: SeriesLike, predicted: SeriesLike) -> float:
    """
    Error relativo ``sqrt(sum (truth - pred)^2 / sum truth^2)``.

    Se evalúa sobre la ventana recibida (7 días en todos los experimentos).

    Raises:
        DimensionMismatchError: Largos distintos
        ZeroDenominatorError: La verdad es idénticamente cero
    """
    a = _as_vector(truth)
    b = _as_vector(predicted)
    if a.shape != b.shape:
        raise DimensionMismatchError(
            f"length mismatch: truth {a.size} vs predicted {b.size}"
        )
    denominator = float(np.sum(a**2))
    if denominator == 0.0:
        raise ZeroDenominatorError("truth is identically zero")
    return float(np.sqrt(np.sum((a - b) ** 2) / denominator))
