"""
Comandos de experimento.

Cada ``cmd_*`` recibe una ExperimentConfig validada, corre su grilla de
celdas (método, m, repetición) en paralelo con joblib, escribe CSVs de forma
atómica y deja un ``manifest_<comando>.json`` con el hash de la config, la
semilla y la versión. Devuelven las rutas escritas.
"""

import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from loguru import logger

from spade4.config.config import settings
from spade4.config.experiment import ExperimentConfig, config_hash, derive_seed
from spade4.config.logging_config import log_run_event
from spade4.exceptions import ConfigError, InsufficientDataError, WindowError
from spade4.models import ForecastResult, NoiseSpec, TimeSeries
from spade4.services import benchmarks, forecaster
from spade4.services.intervals import interval_forecast
from spade4.services.ode import simulate_observable
from spade4.services.timeseries import (
    extract_window,
    inject_noise,
    load_csv,
    normalize,
    relative_error,
    seven_day_average,
    train_holdout_split,
    write_csv,
    write_frame_atomic,
    write_text_atomic,
)

UNAVAILABLE = "unavailable"


# ---------------------------------------------------------------------------
# Datos
# ---------------------------------------------------------------------------


def clean_synthetic(config: ExperimentConfig) -> TimeSeries:
    """Observable sintética sin ruido (I/P o (I+R)/P)."""
    return simulate_observable(
        config.synthetic_params(),
        config.synthetic_initial(),
        config.sim_days,
        target=config.target,
        step=config.step,
    )


def load_observations(
    config: ExperimentConfig, repetition: int = 0
) -> Tuple[TimeSeries, TimeSeries]:
    """
    Serie de verdad y serie observada para una repetición.

    Sintético: la verdad es la simulación limpia y la observada lleva ruido
    (semilla derivada de la repetición) y, si se pide, el promedio de 7 días.
    Datos reales: promedio sobre la serie completa, luego la ventana de la
    ola, luego la normalización; verdad y observada coinciden.
    """
    if config.is_synthetic:
        truth = clean_synthetic(config)
        observed = truth
        if config.eta > 0:
            noise_seed = derive_seed(config.seed, "noise", 0, repetition)
            observed = inject_noise(truth, NoiseSpec(eta=config.eta, seed=noise_seed))
        if config.seven_day_average:
            observed = seven_day_average(observed)
        return truth, observed

    series = load_csv(config.dataset)
    if config.seven_day_average:
        series = seven_day_average(series)
    if config.wave_window is not None:
        series = extract_window(series, *config.wave_window)
    series = normalize(series, config.normalization())
    return series, series


def _truth_window(truth: TimeSeries, m: int, horizon: int) -> Optional[np.ndarray]:
    if m + horizon > truth.m:
        return None
    return truth.values[m : m + horizon]


# ---------------------------------------------------------------------------
# Celdas
# ---------------------------------------------------------------------------


def run_method(
    config: ExperimentConfig,
    method: str,
    train: TimeSeries,
    repetition: int = 0,
    p: Optional[int] = None,
) -> ForecastResult:
    """Pronóstico de T días de un método desde ``train``, con semilla derivada."""
    seed = derive_seed(config.seed, method, train.m, repetition)
    if method == "spade4":
        return forecaster.forecast(
            train, config.embedding(p), config.rfm(seed), config.horizon
        )
    population = config.benchmark_population
    fit = benchmarks.fit_benchmark(train, config.fit_spec(method, seed), population)
    return benchmarks.predict_benchmark(fit, train, population, config.horizon)


def _forecast_cell(
    config: ExperimentConfig, method: str, m: int, repetition: int
) -> Tuple[str, int, int, ForecastResult]:
    _, observed = load_observations(config, repetition)
    if m > observed.m:
        raise WindowError(f"training size m={m} exceeds the {observed.m} available samples")
    train = observed.with_values(observed.values[:m])
    return method, m, repetition, run_method(config, method, train, repetition)


def _run_cells(
    config: ExperimentConfig, repetitions: int = 1
) -> List[Tuple[str, int, int, ForecastResult]]:
    cells = [
        (method, m, rep)
        for method in config.methods
        for m in config.train_sizes
        for rep in range(repetitions)
    ]
    logger.info(f"Running {len(cells)} cells with n_jobs={config.n_jobs}")
    return Parallel(n_jobs=config.n_jobs)(
        delayed(_forecast_cell)(config, method, m, rep) for method, m, rep in cells
    )


# ---------------------------------------------------------------------------
# Salidas
# ---------------------------------------------------------------------------


def _out_dir(config: ExperimentConfig) -> Path:
    path = Path(config.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_manifest(config: ExperimentConfig, command: str, outputs: Sequence[Path]) -> Path:
    """``manifest_<comando>.json``: sin timestamps, para que sea reproducible byte a byte."""
    manifest = {
        "command": command,
        "config_hash": config_hash(config),
        "seed": config.seed,
        "version": settings.app_version,
        "outputs": sorted(Path(p).name for p in outputs),
        "config": config.model_dump(mode="json", exclude={"output_dir"}),
    }
    path = _out_dir(config) / f"manifest_{command}.json"
    write_text_atomic(json.dumps(manifest, indent=2, sort_keys=True) + "\n", path)
    return path


def _written(path: Path) -> Path:
    log_run_event("file_written", {"path": str(path)})
    return path


# ---------------------------------------------------------------------------
# Comandos
# ---------------------------------------------------------------------------


def cmd_simulate(config: ExperimentConfig) -> List[Path]:
    """Escribir la serie sintética diaria normalizada (con ruido si ``eta > 0``)."""
    if not config.is_synthetic:
        raise ConfigError("simulate needs dataset = synthetic")
    series = clean_synthetic(config)
    if config.eta > 0:
        noise_seed = derive_seed(config.seed, "noise", 0, 0)
        series = inject_noise(series, NoiseSpec(eta=config.eta, seed=noise_seed))
    path = _written(write_csv(series, _out_dir(config) / "synthetic_series.csv"))
    outputs = [path]
    write_manifest(config, "simulate", outputs)
    return outputs


def cmd_forecast(config: ExperimentConfig) -> List[Path]:
    """
    Un CSV ``day,value`` por método y m, más ``forecast_m<m>.csv`` con todas
    las columnas y la verdad cuando hay datos retenidos.
    """
    out = _out_dir(config)
    truth, _ = load_observations(config)
    results = _run_cells(config)
    outputs: List[Path] = []

    by_m: Dict[int, Dict[str, ForecastResult]] = {}
    for method, m, _, result in results:
        path = write_csv(result.as_series(), out / f"forecast_{method}_m{m}.csv")
        outputs.append(_written(path))
        by_m.setdefault(m, {})[method] = result

    for m, methods in sorted(by_m.items()):
        first = next(iter(methods.values()))
        frame = pd.DataFrame({"day": first.days.round().astype(np.int64)})
        held_out = _truth_window(truth, m, config.horizon)
        if held_out is not None:
            frame["truth"] = held_out
        for method in config.methods:
            frame[method] = methods[method].values
        outputs.append(_written(write_frame_atomic(frame, out / f"forecast_m{m}.csv")))

    write_manifest(config, "forecast", outputs)
    return outputs


def cmd_evaluate(config: ExperimentConfig) -> List[Path]:
    """
    ``errors.csv`` con (method, m, relative_error), la mediana sobre las
    repeticiones; con más de una repetición también el detalle por repetición.

    Raises:
        WindowError: no hay T días retenidos después de algún m
    """
    out = _out_dir(config)
    truth, _ = load_observations(config)
    for m in config.train_sizes:
        train_holdout_split(truth, m, config.horizon)

    rows = []
    for method, m, rep, result in _run_cells(config, config.repetitions):
        held_out = truth.values[m : m + config.horizon]
        rows.append(
            {
                "method": method,
                "m": m,
                "repetition": rep,
                "relative_error": relative_error(held_out, result.values),
            }
        )
    detail = pd.DataFrame(rows)
    summary = (
        detail.groupby(["method", "m"], sort=False)["relative_error"]
        .median()
        .reset_index()
    )
    outputs = [_written(write_frame_atomic(summary, out / "errors.csv"))]
    if config.repetitions > 1:
        outputs.append(
            _written(write_frame_atomic(detail, out / "errors_by_repetition.csv"))
        )
    write_manifest(config, "evaluate", outputs)
    return outputs


def cmd_interval(config: ExperimentConfig) -> List[Path]:
    """``interval_m<m2>.csv`` con day, point, lo95, hi95 para los T días siguientes a m2."""
    m1, m2 = config.interval_window()
    _, observed = load_observations(config)
    seed = derive_seed(config.seed, "spade4", m2, 0)
    result = interval_forecast(
        observed,
        m1,
        m2,
        config.horizon,
        config.embedding(),
        config.rfm(seed),
        z=config.interval_z,
        n_jobs=config.n_jobs,
    )
    frame = pd.DataFrame(
        {
            "day": result.point.days.round().astype(np.int64),
            "point": result.point.values,
            "lo95": result.lo,
            "hi95": result.hi,
        }
    )
    outputs = [_written(write_frame_atomic(frame, _out_dir(config) / f"interval_m{m2}.csv"))]
    write_manifest(config, "interval", outputs)
    return outputs


def _stability_run(config: ExperimentConfig, train: TimeSeries, run: int) -> np.ndarray:
    return run_method(config, "spade4", train, repetition=run).values


def cmd_stability(config: ExperimentConfig, runs: Optional[int] = None) -> List[Path]:
    """Min / mediana / max por día de SPADE4 sobre ``runs`` bases aleatorias."""
    runs = runs or config.stability_runs
    if runs < 1:
        raise ConfigError(f"runs must be >= 1, got {runs}")
    _, observed = load_observations(config)
    outputs: List[Path] = []
    for m in config.train_sizes:
        if m > observed.m:
            raise WindowError(f"training size m={m} exceeds the {observed.m} available samples")
        train = observed.with_values(observed.values[:m])
        curves = np.vstack(
            Parallel(n_jobs=config.n_jobs)(
                delayed(_stability_run)(config, train, run) for run in range(runs)
            )
        )
        days = train.last_day + train.dt * np.arange(1, config.horizon + 1)
        frame = pd.DataFrame(
            {
                "day": days.round().astype(np.int64),
                "min": curves.min(axis=0),
                "median": np.median(curves, axis=0),
                "max": curves.max(axis=0),
            }
        )
        path = write_frame_atomic(frame, _out_dir(config) / f"stability_m{m}.csv")
        outputs.append(_written(path))
    write_manifest(config, "stability", outputs)
    return outputs


def _sweep_cell(
    config: ExperimentConfig, truth: TimeSeries, observed: TimeSeries, p: int, m: int
) -> Dict[str, object]:
    span = (p - 1) * config.tau + 1
    row: Dict[str, object] = {"p": p, "m": m, "relative_error": np.nan, "status": UNAVAILABLE}
    if m < span + 1 or m + config.horizon > min(observed.m, truth.m):
        return row
    train = observed.with_values(observed.values[:m])
    try:
        result = run_method(config, "spade4", train, repetition=0, p=p)
    except InsufficientDataError as exc:
        logger.warning(f"Embedding sweep cell p={p}, m={m} unavailable: {exc}")
        return row
    held_out = truth.values[m : m + config.horizon]
    row.update(relative_error=relative_error(held_out, result.values), status="ok")
    return row


def cmd_embedding_sweep(
    config: ExperimentConfig, p_values: Optional[Sequence[int]] = None
) -> List[Path]:
    """
    Error de SPADE4 para cada (p, m). Las celdas con p demasiado grande para
    m quedan marcadas ``unavailable`` y la corrida sigue.
    """
    p_values = tuple(p_values or config.p_values)
    if any(p < 1 for p in p_values):
        raise ConfigError(f"embedding dimensions must be >= 1, got {list(p_values)}")
    truth, observed = load_observations(config)
    rows = Parallel(n_jobs=config.n_jobs)(
        delayed(_sweep_cell)(config, truth, observed, p, m)
        for p in p_values
        for m in config.train_sizes
    )
    frame = pd.DataFrame(rows, columns=["p", "m", "relative_error", "status"])
    outputs = [_written(write_frame_atomic(frame, _out_dir(config) / "embedding_sweep.csv"))]
    write_manifest(config, "embed-sweep", outputs)
    return outputs
