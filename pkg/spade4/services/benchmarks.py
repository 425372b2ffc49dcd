"""
Ajustes benchmark de modelos compartimentales.

Cada ajuste minimiza el error cuadrático entre la observable del modelo
(I o I + R) y la serie de entrenamiento con Nelder–Mead, desde muchas
inicializaciones aleatorias y para cada candidato E(0) = k * I0. Las tasas
se optimizan en escala logarítmica y mu con una transformación logística,
así el optimizador trabaja sin restricciones.
"""

from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from scipy.optimize import minimize
from scipy.special import expit, logit

from spade4.config.logging_config import log_run_event
from spade4.exceptions import (
    DivergenceError,
    DomainError,
    FitFailureError,
    InsufficientDataError,
)
from spade4.models import (
    BenchmarkFit,
    FitSpec,
    ForecastResult,
    ModelKind,
    TargetKind,
    TimeSeries,
)
from spade4.services.ode import KIND_CODES, integrate_compartments, rk4_compartments
from spade4.services.rfm import RSS_FLOOR

LOG_RATE_RANGE = (np.log(1e-3), np.log(10.0))
MU_CLIP = 1e-6


class _Candidate(NamedTuple):
    sse: float
    theta: np.ndarray
    e0_index: int
    restart: int


def _n_free(kind: ModelKind, q: int) -> int:
    if kind is ModelKind.SEIR_BETA_T:
        return q + 3
    return 4 if kind is ModelKind.SUEIR else 3


def _unpack(kind: ModelKind, theta: np.ndarray) -> Tuple[float, float, float, float, np.ndarray]:
    """theta -> (beta, sigma, gamma, mu, xi)."""
    if kind is ModelKind.SEIR_BETA_T:
        return 0.0, float(np.exp(theta[-2])), float(np.exp(theta[-1])), 1.0, theta[:-2]
    beta, sigma, gamma = np.exp(theta[:3])
    mu = float(expit(theta[3])) if kind is ModelKind.SUEIR else 1.0
    return float(beta), float(sigma), float(gamma), mu, np.empty(0)


def _observable(states: np.ndarray, target: TargetKind) -> np.ndarray:
    if target is TargetKind.CUMULATIVE:
        return states[:, 2] + states[:, 3]
    return states[:, 2]


def _training_sse(
    theta: np.ndarray,
    kind: ModelKind,
    target: TargetKind,
    observed: np.ndarray,
    y0: np.ndarray,
    population: float,
    step: float,
    steps_per_sample: int,
    t_max: float,
) -> float:
    if not np.all(np.isfinite(theta)):
        return np.inf
    beta, sigma, gamma, mu, xi = _unpack(kind, theta)
    states = rk4_compartments(
        KIND_CODES[kind], sigma, gamma, mu, population, beta,
        np.ascontiguousarray(xi, dtype=float), 0.0, t_max,
        y0, step, observed.size, steps_per_sample,
    )
    residual = _observable(states, target) - observed
    sse = float(residual @ residual)
    return sse if np.isfinite(sse) else np.inf


def _initial_theta(kind: ModelKind, q: int, rng: np.random.Generator) -> np.ndarray:
    if kind is ModelKind.SEIR_BETA_T:
        xi0 = np.exp(rng.uniform(*LOG_RATE_RANGE))
        xi_rest = rng.uniform(-xi0 / 2.0, xi0 / 2.0, size=q)
        return np.concatenate([[xi0], xi_rest, rng.uniform(*LOG_RATE_RANGE, size=2)])
    theta = rng.uniform(*LOG_RATE_RANGE, size=3)
    if kind is ModelKind.SUEIR:
        mu = np.clip(rng.uniform(0.0, 1.0), MU_CLIP, 1.0 - MU_CLIP)
        theta = np.append(theta, logit(mu))
    return theta


def _run_restart(
    kind: ModelKind,
    target: TargetKind,
    q: int,
    observed: np.ndarray,
    y0: np.ndarray,
    population: float,
    spec: FitSpec,
    steps_per_sample: int,
    t_max: float,
    seed_key: Tuple[int, ...],
    e0_index: int,
    restart: int,
) -> _Candidate:
    rng = np.random.default_rng(np.random.SeedSequence(seed_key))
    x0 = _initial_theta(kind, q, rng)
    args = (kind, target, observed, y0, population, spec.step, steps_per_sample, t_max)
    result = minimize(
        _training_sse,
        x0,
        args=args,
        method="Nelder-Mead",
        options={"maxiter": spec.max_iter, "xatol": spec.tol, "fatol": spec.tol},
    )
    sse = float(result.fun) if np.isfinite(result.fun) else np.inf
    return _Candidate(sse=sse, theta=np.asarray(result.x), e0_index=e0_index, restart=restart)


def _check_inputs(train: TimeSeries, population: float, n_free: int) -> None:
    if population <= 0:
        raise DomainError(f"population must be positive, got {population}")
    if train.m < n_free + 1:
        raise InsufficientDataError(
            f"{n_free} free parameters need at least {n_free + 1} samples, got {train.m}"
        )


def _bic(sse: float, n: int, k: int) -> float:
    return float(n * np.log(max(sse, RSS_FLOOR) / n) + k * np.log(n))


def _fit_order(
    train: TimeSeries, spec: FitSpec, population: float, q: Optional[int]
) -> BenchmarkFit:
    kind = spec.model_kind
    order = q if q is not None else 0
    n_free = _n_free(kind, order)
    _check_inputs(train, population, n_free)

    observed = np.ascontiguousarray(train.values, dtype=float)
    i0 = max(float(observed[0]), 0.0)
    steps_per_sample = int(round(train.dt / spec.step))
    t_max = train.dt * (train.m - 1)

    jobs = []
    for e0_index, k in enumerate(spec.e0_grid_multipliers):
        e0 = k * i0
        y0 = np.array([max(population - e0 - i0, 0.0), e0, i0, 0.0])
        for restart in range(spec.restarts):
            seed_key = (spec.seed, e0_index, restart) if q is None else (
                spec.seed, q, e0_index, restart
            )
            jobs.append(
                delayed(_run_restart)(
                    kind, spec.target_kind, order, observed, y0, population, spec,
                    steps_per_sample, t_max, seed_key, e0_index, restart,
                )
            )
    candidates: List[_Candidate] = Parallel(n_jobs=spec.n_jobs)(jobs)

    e0_sse: Dict[float, float] = {}
    for cand in candidates:
        k = float(spec.e0_grid_multipliers[cand.e0_index])
        e0_sse[k] = min(e0_sse.get(k, np.inf), cand.sse)

    best = min(candidates, key=lambda cand: cand.sse)
    if not np.isfinite(best.sse):
        raise FitFailureError(
            f"all {len(candidates)} restarts of the {kind.value} fit diverged"
        )
    diverged = sum(1 for cand in candidates if not np.isfinite(cand.sse))
    if diverged:
        logger.debug(f"{diverged}/{len(candidates)} restarts diverged for {kind.value}")

    beta, sigma, gamma, mu, xi = _unpack(kind, best.theta)
    fit = BenchmarkFit(
        model_kind=kind,
        target_kind=spec.target_kind,
        beta=None if kind is ModelKind.SEIR_BETA_T else beta,
        xi=tuple(float(v) for v in xi) if kind is ModelKind.SEIR_BETA_T else None,
        sigma=sigma,
        gamma=gamma,
        mu=mu if kind is ModelKind.SUEIR else None,
        e0=float(spec.e0_grid_multipliers[best.e0_index]) * i0,
        i0=i0,
        population=population,
        train_sse=best.sse,
        q=q,
        t_min=0.0,
        t_max=t_max,
        step=spec.step,
        n_train=train.m,
        dt=train.dt,
        bic=_bic(best.sse, train.m, n_free),
        e0_sse=e0_sse,
    )
    log_run_event(
        "benchmark_fit",
        {
            "model": kind.value,
            "q": q,
            "m": train.m,
            "sse": best.sse,
            "e0_multiplier": spec.e0_grid_multipliers[best.e0_index],
            "restarts": len(candidates),
            "diverged": diverged,
        },
    )
    return fit


def fit_benchmark(train: TimeSeries, spec: FitSpec, population: float) -> BenchmarkFit:
    """
    Ajustar SEIR o SμEIR por mínimos cuadrados.

    Para cada candidato E(0) = k * I0 se corren ``spec.restarts`` Nelder–Mead
    desde puntos aleatorios (tasas log-uniformes en [1e-3, 10], mu uniforme
    en [0, 1]); gana el de menor error cuadrático, con empates al primero.
    Con ``model_kind = seir_beta_t`` delega en ``fit_seir_beta_t``.

    Args:
        train: Observable de entrenamiento
        spec: Modelo, variable ajustada, reinicios y grillas
        population: P en las unidades de la observable

    Raises:
        DomainError: population <= 0
        InsufficientDataError: menos muestras que parámetros + 1
        FitFailureError: todos los reinicios divergieron
    """
    if spec.model_kind is ModelKind.SEIR_BETA_T:
        return fit_seir_beta_t(train, spec, population)
    return _fit_order(train, spec, population, q=None)


def fit_seir_beta_t(train: TimeSeries, spec: FitSpec, population: float) -> BenchmarkFit:
    """
    SEIR con beta(t) en base de Legendre; el orden q se elige por BIC.

    El dominio de la base es el tramo de entrenamiento. El BIC cuenta q + 3
    parámetros libres; los empates van al q más chico.
    """
    if population <= 0:
        raise DomainError(f"population must be positive, got {population}")
    spec = spec.model_copy(update={"model_kind": ModelKind.SEIR_BETA_T})
    fits = [_fit_order(train, spec, population, q=q) for q in sorted(set(spec.q_grid))]
    best = min(fits, key=lambda fit: (fit.bic, fit.q))
    log_run_event(
        "legendre_order_selected",
        {"q": best.q, "bic": {fit.q: round(fit.bic, 4) for fit in fits}},
    )
    return best


def predict_benchmark(
    fit: BenchmarkFit, train: TimeSeries, population: float, T: int = 7
) -> ForecastResult:
    """
    Integrar el modelo ajustado sobre el entrenamiento más T días.

    Returns:
        ForecastResult: los últimos T valores diarios de I (o I + R)

    Raises:
        DivergenceError: la integración produjo valores no finitos
    """
    if T < 1:
        raise DomainError(f"horizon must be >= 1, got {T}")
    if population != fit.population:
        fit = fit.model_copy(update={"population": float(population)})
    n_samples = train.m + T
    states = integrate_compartments(
        fit.params(), fit.initial_state(), n_samples, sample_every=train.dt, step=fit.step
    )
    observable = _observable(states, fit.target_kind)
    if not np.all(np.isfinite(observable)):
        bad = int(np.flatnonzero(~np.isfinite(observable))[0])
        raise DivergenceError(
            f"{fit.model_kind.value} integration diverged at day {bad * train.dt}",
            t=bad * train.dt,
        )
    return ForecastResult(
        horizon_days=T,
        values=np.maximum(observable[-T:], 0.0),
        start_day=train.last_day + train.dt,
        dt=train.dt,
        method=fit.model_kind.value,
        model_handle=fit,
    )
