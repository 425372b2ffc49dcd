"""
Modelos compartimentales e integrador de paso fijo.

Contiene:
- legendre_eval() / beta_of_t(): tasa de transmisión en base de Legendre
- seir_rhs() / sueir_rhs(): lados derechos de SEIR y SμEIR
- integrate(): RK4 clásico de paso fijo con detección de divergencia
- decimate(): submuestreo diario de una trayectoria
- simulate_observable() / simulate_sueir_observable(): datos sintéticos
- integrate_compartments(): el mismo RK4 compilado con numba, usado por
  los ajustes benchmark donde la integración se repite millones de veces
"""

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from loguru import logger
from numba import njit

from spade4.exceptions import DivergenceError, DomainError
from spade4.models import (
    CompartmentState,
    ModelKind,
    SeirParams,
    SueirParams,
    TargetKind,
    TimeSeries,
    TransmissionBasis,
)

DEFAULT_STEP = 0.01
_DOMAIN_TOL = 1e-9

RhsCallable = Callable[[float, np.ndarray], np.ndarray]
ModelParams = Union[SeirParams, SueirParams]

KIND_CODES = {ModelKind.SEIR: 0, ModelKind.SUEIR: 1, ModelKind.SEIR_BETA_T: 2}


@dataclass(frozen=True)
class Trajectory:
    """Estados muestreados en cada paso: ``states[i]`` corresponde a ``times[i]``."""

    times: np.ndarray
    states: np.ndarray
    step: float

    def state(self, index: int) -> CompartmentState:
        return CompartmentState.from_array(self.states[index], t=float(self.times[index]))


# ---------------------------------------------------------------------------
# Tasa de transmisión variable
# ---------------------------------------------------------------------------


def legendre_eval(order_k: int, x):
    """
    Polinomio de Legendre P_k(x) por la recurrencia de Bonnet.

    ``(k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}``, con P_0 = 1 y P_1 = x.
    Acepta escalares o arrays.
    """
    if order_k < 0:
        raise DomainError(f"Legendre order must be >= 0, got {order_k}")
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if order_k == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p_curr = x.copy()
    for k in range(1, order_k):
        p_prev, p_curr = p_curr, ((2 * k + 1) * x * p_curr - k * p_prev) / (k + 1)
    return p_curr if p_curr.ndim else float(p_curr)


def map_to_unit_interval(t, t_min: float, t_max: float):
    """Mapa afín ``x = (2t - b - a) / (b - a)`` de [a, b] a [-1, 1]."""
    return (2.0 * np.asarray(t, dtype=float) - t_max - t_min) / (t_max - t_min)


def beta_of_t(basis: TransmissionBasis, t: float) -> float:
    """
    Evaluar ``beta(t) = sum_k xi_k P_k(x)``.

    Raises:
        DomainError: t fuera de [t_min, t_max]
    """
    width = basis.t_max - basis.t_min
    if t < basis.t_min - _DOMAIN_TOL * width or t > basis.t_max + _DOMAIN_TOL * width:
        raise DomainError(
            f"t={t} outside transmission domain [{basis.t_min}, {basis.t_max}]"
        )
    x = float(np.clip(map_to_unit_interval(t, basis.t_min, basis.t_max), -1.0, 1.0))
    return float(sum(xi * legendre_eval(k, x) for k, xi in enumerate(basis.coeffs)))


def _held_beta(basis: TransmissionBasis, t: float) -> float:
    # fuera del dominio se mantiene el valor del extremo; beta nunca negativa
    clipped = min(max(t, basis.t_min), basis.t_max)
    return max(beta_of_t(basis, clipped), 0.0)


# ---------------------------------------------------------------------------
# Lados derechos
# ---------------------------------------------------------------------------


def _seir_rates(t: float, y: np.ndarray, params: SeirParams) -> np.ndarray:
    S, E, I, _ = y  # noqa: E741
    beta = _held_beta(params.beta, t) if params.time_varying else params.beta
    force = beta * S * I / params.population
    return np.array(
        [-force, force - params.sigma * E, params.sigma * E - params.gamma * I, params.gamma * I]
    )


def _sueir_rates(t: float, y: np.ndarray, params: SueirParams) -> np.ndarray:
    S, E, I, _ = y  # noqa: E741
    force = params.beta * (I + E) * S / params.population
    return np.array(
        [
            -force,
            force - params.sigma * E,
            params.mu * params.sigma * E - params.gamma * I,
            params.gamma * I,
        ]
    )


def seir_rhs(state: CompartmentState, params: SeirParams) -> np.ndarray:
    """
    Derivada del SEIR en ``state``: (dS, dE, dI, dR).

    Con beta variable se evalúa ``beta_of_t`` en ``state.t``.
    """
    return _seir_rates(state.t, state.as_array(), params)


def sueir_rhs(state: CompartmentState, params: SueirParams) -> np.ndarray:
    """Derivada del SμEIR en ``state``: (dS, dE, dI, dR)."""
    return _sueir_rates(state.t, state.as_array(), params)


def model_rhs(params: ModelParams) -> RhsCallable:
    """Adaptar un registro de parámetros a un callable ``f(t, y)``."""
    if isinstance(params, SueirParams):
        return lambda t, y: _sueir_rates(t, y, params)
    return lambda t, y: _seir_rates(t, y, params)


# ---------------------------------------------------------------------------
# Integración
# ---------------------------------------------------------------------------


def integrate(
    rhs: Union[RhsCallable, ModelParams],
    initial: Union[CompartmentState, np.ndarray],
    step: float = DEFAULT_STEP,
    horizon: float = 1.0,
) -> Trajectory:
    """
    RK4 clásico de paso fijo sobre ``[t0, t0 + horizon]``.

    Args:
        rhs: Callable ``f(t, y)`` o un registro SeirParams / SueirParams
        initial: Estado inicial (CompartmentState o vector)
        step: Paso de integración (días)
        horizon: Largo del intervalo (días)

    Returns:
        Trajectory: estado en cada paso, incluido el inicial

    Raises:
        DomainError: step o horizon no positivos
        DivergenceError: aparece un estado no finito
    """
    if step <= 0 or horizon <= 0:
        raise DomainError(f"step and horizon must be positive (step={step}, horizon={horizon})")
    f = rhs if callable(rhs) else model_rhs(rhs)
    if isinstance(initial, CompartmentState):
        t0, y = initial.t, initial.as_array()
    else:
        t0, y = 0.0, np.asarray(initial, dtype=float).copy()

    n_steps = max(int(round(horizon / step)), 1)
    times = t0 + step * np.arange(n_steps + 1)
    states = np.empty((n_steps + 1, y.size))
    states[0] = y
    half = 0.5 * step
    for i in range(n_steps):
        t = times[i]
        k1 = f(t, y)
        k2 = f(t + half, y + half * k1)
        k3 = f(t + half, y + half * k2)
        k4 = f(t + step, y + step * k3)
        y = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise DivergenceError(f"non-finite state at t={times[i + 1]:.4f}", t=float(times[i + 1]))
        states[i + 1] = y
    return Trajectory(times=times, states=states, step=step)


def decimate(trajectory: Trajectory, every: float = 1.0) -> Trajectory:
    """Submuestrear una trayectoria cada ``every`` días (diario por defecto)."""
    stride = int(round(every / trajectory.step))
    if stride < 1 or abs(stride * trajectory.step - every) > 1e-9 * max(every, 1.0):
        raise DomainError(f"sampling interval {every} is not a multiple of step {trajectory.step}")
    return Trajectory(
        times=trajectory.times[::stride], states=trajectory.states[::stride], step=every
    )


def simulate_observable(
    params: ModelParams,
    initial: CompartmentState,
    horizon_days: int,
    target: TargetKind = TargetKind.ACTIVE,
    step: float = DEFAULT_STEP,
) -> TimeSeries:
    """
    Observable diaria normalizada por la población sobre ``[0, horizon_days]``.

    ``target=active`` devuelve I/P; ``target=cumulative`` devuelve (I + R)/P.
    """
    if horizon_days < 1:
        raise DomainError(f"horizon_days must be >= 1, got {horizon_days}")
    daily = decimate(integrate(params, initial, step=step, horizon=float(horizon_days)))
    observable = daily.states[:, 2]
    if target is TargetKind.CUMULATIVE:
        observable = observable + daily.states[:, 3]
    logger.debug(
        f"Simulated {type(params).__name__} over {horizon_days} days (step={step})"
    )
    return TimeSeries(t0=initial.t, dt=1.0, values=observable / params.population)


def simulate_sueir_observable(
    params: SueirParams,
    initial: CompartmentState,
    horizon_days: int,
    step: float = DEFAULT_STEP,
) -> TimeSeries:
    """Serie diaria I(t)/P del SμEIR: el dataset sintético de referencia."""
    return simulate_observable(params, initial, horizon_days, TargetKind.ACTIVE, step)


# ---------------------------------------------------------------------------
# Kernel compilado para los ajustes
# ---------------------------------------------------------------------------


@njit(cache=True)
def _kernel_beta(t, beta, xi, t_min, t_max):
    if xi.size == 0:
        return beta
    x = (2.0 * t - t_max - t_min) / (t_max - t_min)
    if x > 1.0:
        x = 1.0
    elif x < -1.0:
        x = -1.0
    total = xi[0]
    if xi.size > 1:
        p_prev = 1.0
        p_curr = x
        total += xi[1] * x
        for k in range(1, xi.size - 1):
            p_next = ((2 * k + 1) * x * p_curr - k * p_prev) / (k + 1)
            total += xi[k + 1] * p_next
            p_prev = p_curr
            p_curr = p_next
    return max(total, 0.0)


@njit(cache=True)
def _kernel_rates(kind, t, y, sigma, gamma, mu, population, beta, xi, t_min, t_max, out):
    S = y[0]
    E = y[1]
    I = y[2]  # noqa: E741
    b = _kernel_beta(t, beta, xi, t_min, t_max)
    if kind == 1:
        force = b * (I + E) * S / population
        out[2] = mu * sigma * E - gamma * I
    else:
        force = b * S * I / population
        out[2] = sigma * E - gamma * I
    out[0] = -force
    out[1] = force - sigma * E
    out[3] = gamma * I


@njit(cache=True)
def rk4_compartments(
    kind, sigma, gamma, mu, population, beta, xi, t_min, t_max,
    y0, step, n_samples, steps_per_sample,
):
    """
    RK4 compilado: ``kind`` 0 = SEIR, 1 = SμEIR, 2 = SEIR con beta(t) (pesos ``xi``).

    Devuelve (n_samples, 4); desde la primera divergencia las filas quedan en NaN.
    """
    out = np.full((n_samples, 4), np.nan)
    y = y0.copy()
    out[0] = y
    k1 = np.empty(4)
    k2 = np.empty(4)
    k3 = np.empty(4)
    k4 = np.empty(4)
    tmp = np.empty(4)
    half = 0.5 * step
    t = 0.0
    for sample in range(1, n_samples):
        for _ in range(steps_per_sample):
            _kernel_rates(kind, t, y, sigma, gamma, mu, population, beta, xi, t_min, t_max, k1)
            for j in range(4):
                tmp[j] = y[j] + half * k1[j]
            _kernel_rates(kind, t + half, tmp, sigma, gamma, mu, population, beta, xi, t_min, t_max, k2)
            for j in range(4):
                tmp[j] = y[j] + half * k2[j]
            _kernel_rates(kind, t + half, tmp, sigma, gamma, mu, population, beta, xi, t_min, t_max, k3)
            for j in range(4):
                tmp[j] = y[j] + step * k3[j]
            _kernel_rates(kind, t + step, tmp, sigma, gamma, mu, population, beta, xi, t_min, t_max, k4)
            for j in range(4):
                y[j] = y[j] + (step / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
            t += step
        for j in range(4):
            if not np.isfinite(y[j]):
                return out
        out[sample] = y
    return out


def integrate_compartments(
    params: ModelParams,
    initial: CompartmentState,
    n_samples: int,
    sample_every: float = 1.0,
    step: float = DEFAULT_STEP,
) -> np.ndarray:
    """
    Estados en ``t = k * sample_every`` para k = 0..n_samples-1, con el kernel compilado.

    Usa el mismo RK4 que ``integrate``; las filas posteriores a una divergencia
    quedan en NaN en lugar de lanzar, para que el optimizador pueda descartarlas.
    """
    steps_per_sample = int(round(sample_every / step))
    if steps_per_sample < 1:
        raise DomainError(f"step {step} larger than sampling interval {sample_every}")
    if isinstance(params, SueirParams):
        kind, beta, mu, xi = 1, params.beta, params.mu, np.empty(0)
        t_min, t_max = 0.0, 1.0
    elif params.time_varying:
        kind, beta, mu = 2, 0.0, 1.0
        xi = np.asarray(params.beta.coeffs, dtype=float)
        t_min, t_max = params.beta.t_min, params.beta.t_max
    else:
        kind, beta, mu, xi = 0, params.beta, 1.0, np.empty(0)
        t_min, t_max = 0.0, 1.0
    return rk4_compartments(
        kind,
        float(params.sigma),
        float(params.gamma),
        float(mu),
        float(params.population),
        float(beta),
        xi,
        float(t_min),
        float(t_max),
        initial.as_array(),
        float(step),
        int(n_samples),
        steps_per_sample,
    )
