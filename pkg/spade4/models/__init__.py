"""
Modelos de datos del toolkit.

Este módulo contiene todos los tipos de dominio del pipeline:
- Series de tiempo y especificaciones de preprocesamiento
- Estados y parámetros de los modelos compartimentales
- Configuración del embedding y de los random features
- Modelos ajustados y resultados de pronóstico / intervalos
- Especificación y resultado de los ajustes benchmark

Los tipos que transportan vectores guardan arrays de numpy de solo lectura;
todos los modelos son inmutables después de construidos.
"""

import math
from enum import Enum
from typing import Annotated, Any, Dict, Optional, Tuple, Union

import numpy as np
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)

ZERO_COEFFICIENT_TOL = 1e-12

DEFAULT_LAMBDA_GRID: Tuple[float, ...] = (
    1e-6,
    5e-6,
    1e-7,
    5e-7,
    1e-8,
    5e-8,
    1e-9,
    5e-9,
)
DEFAULT_E0_MULTIPLIERS: Tuple[float, ...] = (0, 1, 5, 10, 15, 20, 25, 50, 80)
DEFAULT_Q_GRID: Tuple[int, ...] = (1, 2, 3, 4, 5, 6)


def _readonly_array(value: Any) -> np.ndarray:
    arr = np.array(value, dtype=float)
    arr.setflags(write=False)
    return arr


FloatArray = Annotated[np.ndarray, BeforeValidator(_readonly_array)]


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


# ---------------------------------------------------------------------------
# Series de tiempo
# ---------------------------------------------------------------------------


class TimeSeries(_Frozen):
    """
    Serie escalar muestreada uniformemente.

    Los tiempos son implícitos: ``t_k = t0 + k*dt`` para k = 0..m-1, sin
    huecos. En la práctica t0 es un índice de día entero.

    Attributes:
        t0: Día de la primera muestra
        dt: Paso de muestreo en días (positivo)
        values: Observaciones en orden temporal
    """

    t0: float = 0.0
    dt: float = Field(default=1.0, gt=0)
    values: FloatArray

    @field_validator("values")
    @classmethod
    def _non_empty_vector(cls, value: np.ndarray) -> np.ndarray:
        if value.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if value.size == 0:
            raise ValueError("values must be non-empty")
        return value

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def m(self) -> int:
        return int(self.values.size)

    @property
    def days(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)

    @property
    def last_day(self) -> float:
        return self.t0 + self.dt * (self.values.size - 1)

    def with_values(self, values: Any) -> "TimeSeries":
        """Misma grilla temporal, otros valores."""
        return TimeSeries(t0=self.t0, dt=self.dt, values=values)


class NormalizationSpec(_Frozen):
    """
    Normalización por ``c*P``.

    Attributes:
        population: Población P (personas)
        scale_fraction: Constante c en (0, 1]
    """

    population: float = Field(gt=0)
    scale_fraction: float = Field(default=1.0, gt=0, le=1)

    @property
    def divisor(self) -> float:
        return self.population * self.scale_fraction


class NoiseSpec(_Frozen):
    """Ruido multiplicativo gaussiano de nivel ``eta`` (desvío estándar)."""

    eta: float = Field(default=0.0, ge=0)
    seed: int = Field(default=0, ge=0)


# ---------------------------------------------------------------------------
# Modelos compartimentales
# ---------------------------------------------------------------------------


class ModelKind(str, Enum):
    SEIR = "seir"
    SUEIR = "sueir"
    SEIR_BETA_T = "seir_beta_t"


class TargetKind(str, Enum):
    ACTIVE = "active"
    CUMULATIVE = "cumulative"


class CompartmentState(_Frozen):
    """Estado (S, E, I, R) al tiempo t."""

    S: float = Field(ge=0)
    E: float = Field(ge=0)
    I: float = Field(ge=0)  # noqa: E741
    R: float = Field(ge=0)
    t: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.S, self.E, self.I, self.R], dtype=float)

    @classmethod
    def from_array(cls, y: Any, t: float = 0.0) -> "CompartmentState":
        S, E, I, R = (max(float(v), 0.0) for v in y)  # noqa: E741
        return cls(S=S, E=E, I=I, R=R, t=t)

    @property
    def total(self) -> float:
        return self.S + self.E + self.I + self.R


class TransmissionBasis(_Frozen):
    """
    Tasa de transmisión en base de Legendre sobre ``[t_min, t_max]``.

    Attributes:
        coeffs: Pesos xi_0..xi_q
        t_min: Extremo izquierdo a (días)
        t_max: Extremo derecho b (días)
    """

    coeffs: Tuple[float, ...] = Field(min_length=1)
    t_min: float
    t_max: float

    @model_validator(mode="after")
    def _ordered_domain(self) -> "TransmissionBasis":
        if not self.t_min < self.t_max:
            raise ValueError("t_min must be smaller than t_max")
        return self

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1


class SeirParams(_Frozen):
    """Parámetros del SEIR; ``beta`` puede ser constante o una TransmissionBasis."""

    beta: Union[TransmissionBasis, float]
    sigma: float = Field(gt=0)
    gamma: float = Field(gt=0)
    population: float = Field(gt=0)

    @field_validator("beta")
    @classmethod
    def _non_negative_beta(cls, value):
        if isinstance(value, (int, float)) and value < 0:
            raise ValueError("constant beta must be >= 0")
        return value

    @property
    def time_varying(self) -> bool:
        return isinstance(self.beta, TransmissionBasis)


class SueirParams(_Frozen):
    """Parámetros del SμEIR, con tasa de descubrimiento ``mu`` en [0, 1]."""

    beta: float = Field(ge=0)
    sigma: float = Field(gt=0)
    gamma: float = Field(gt=0)
    mu: float = Field(ge=0, le=1)
    population: float = Field(gt=0)


# ---------------------------------------------------------------------------
# Embedding y random features
# ---------------------------------------------------------------------------


class EmbeddingConfig(_Frozen):
    """
    Configuración del embedding por retardos.

    Attributes:
        p: Dimensión del embedding (2d+1 = 9 para modelos de cuatro compartimentos)
        tau: Retardo en muestras
        smooth_s: Fuerza del filtro de suavizado (1 = sin suavizado)
        centered_smoothing: Ventana centrada en lugar de la ventana desplazada
    """

    p: int = Field(default=9, ge=1)
    tau: int = Field(default=1, ge=1)
    smooth_s: int = Field(default=1, ge=1)
    centered_smoothing: bool = False

    @property
    def span(self) -> int:
        """Muestras que abarca un vector de retardos."""
        return (self.p - 1) * self.tau + 1


class DelayDataset(_Frozen):
    """
    Pares (h_k, ydot(t_k)) para k = k_start..k_end (índices 1-based).

    Cada fila de ``inputs`` está ordenada de la muestra más nueva a la más vieja.
    """

    inputs: FloatArray
    targets: FloatArray
    k_start: int
    k_end: int

    @model_validator(mode="after")
    def _matching_rows(self) -> "DelayDataset":
        if self.inputs.ndim != 2:
            raise ValueError("inputs must be a matrix")
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ValueError("inputs and targets must have the same row count")
        return self

    @property
    def count(self) -> int:
        return int(self.inputs.shape[0])


class Activation(str, Enum):
    RELU = "relu"
    SIN = "sin"
    SIGMOID = "sigmoid"


class RandomFeatureBasis(_Frozen):
    """
    Pesos y sesgos aleatorios congelados.

    Attributes:
        weights: Matriz (N, p) con entradas N(0, 1)
        biases: Vector (N,) con entradas U(0, 2*pi)
        activation: No linealidad aplicada a ``<h, w> + b``
        seed: Semilla con la que se muestrearon
    """

    weights: FloatArray
    biases: FloatArray
    activation: Activation = Activation.RELU
    seed: int = 0

    @model_validator(mode="after")
    def _consistent_shapes(self) -> "RandomFeatureBasis":
        if self.weights.ndim != 2 or self.weights.shape[0] < 1:
            raise ValueError("weights must be an (N, p) matrix with N >= 1")
        if self.biases.shape != (self.weights.shape[0],):
            raise ValueError("biases must have one entry per weight vector")
        return self

    @property
    def n_features(self) -> int:
        return int(self.weights.shape[0])

    @property
    def dim(self) -> int:
        return int(self.weights.shape[1])


class SparseCoefficients(_Frozen):
    """
    Vector de coeficientes aprendido por LASSO y su diagnóstico.

    Attributes:
        c: Coeficientes (N,)
        lam: Peso de regularización usado
        scaled: Si el término de ajuste se escaló por 1/(2n)
        objective: Valor final del objetivo
        kkt_residual: Máxima violación de las condiciones KKT
        n_iter: Barridos de coordenadas realizados
        converged: Si se alcanzó la tolerancia antes de max_iter
    """

    c: FloatArray
    lam: float = Field(ge=0)
    scaled: bool = False
    objective: float = math.nan
    kkt_residual: float = math.nan
    n_iter: int = 0
    converged: bool = True

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(np.abs(self.c) > ZERO_COEFFICIENT_TOL))


class RfmConfig(_Frozen):
    """
    Configuración del modelo de random features.

    Attributes:
        n_features: N explícito; si es None se usa ``features_per_sample * m``
        features_per_sample: Multiplicador de m (50 por defecto)
        feature_cap: Tope opcional de N para series largas (p. ej. 20000)
        seed: Semilla de la base
        lambda_grid: Candidatos de lambda para la selección por BIC
        activation: No linealidad de los features
        tol: Tolerancia sobre la máxima actualización de coordenada
        max_iter: Máximo de barridos de coordinate descent
        scaled_objective: Escalar el término de ajuste por 1/(2n)
        warm_start: Recorrer la grilla como camino, de mayor a menor lambda
        n_jobs: Workers de joblib para la grilla de lambda (solo sin warm_start)
    """

    n_features: Optional[int] = Field(default=None, ge=1)
    features_per_sample: int = Field(default=50, ge=1)
    feature_cap: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0)
    lambda_grid: Tuple[float, ...] = Field(default=DEFAULT_LAMBDA_GRID, min_length=1)
    activation: Activation = Activation.RELU
    tol: float = Field(default=1e-10, gt=0)
    max_iter: int = Field(default=100_000, ge=1)
    scaled_objective: bool = False
    warm_start: bool = True
    n_jobs: int = 1

    @field_validator("lambda_grid")
    @classmethod
    def _non_negative_grid(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(lam < 0 for lam in value):
            raise ValueError("lambda values must be >= 0")
        return value

    def resolve_n_features(self, m: int) -> int:
        n = self.n_features if self.n_features is not None else self.features_per_sample * m
        if self.feature_cap is not None:
            n = min(n, self.feature_cap)
        return max(int(n), 1)


# ---------------------------------------------------------------------------
# Pronósticos
# ---------------------------------------------------------------------------


class Spade4Model(_Frozen):
    """
    Modelo SPADE4 ajustado.

    Attributes:
        basis: Base de random features
        coeffs: Coeficientes dispersos
        cfg: Configuración del embedding usada en el ajuste
        train_tail: Últimas ``cfg.span`` observaciones (p cuando tau = 1)
        dt: Paso de muestreo (días)
        origin_day: Día de la última observación de entrenamiento
    """

    basis: RandomFeatureBasis
    coeffs: SparseCoefficients
    cfg: EmbeddingConfig
    train_tail: FloatArray
    dt: float = Field(default=1.0, gt=0)
    origin_day: float = 0.0

    @model_validator(mode="after")
    def _consistent_model(self) -> "Spade4Model":
        if self.basis.dim != self.cfg.p:
            raise ValueError("basis dimension must equal the embedding dimension p")
        if self.coeffs.c.shape != (self.basis.n_features,):
            raise ValueError("coefficient vector must match the basis size")
        if self.train_tail.shape != (self.cfg.span,):
            raise ValueError("train_tail must hold exactly cfg.span values")
        return self


class ForecastResult(_Frozen):
    """
    Pronóstico puntual sobre un horizonte de T días.

    Attributes:
        horizon_days: T
        values: Pronósticos para t_{m+1}..t_{m+T}
        start_day: Día del primer pronóstico
        dt: Paso entre pronósticos
        method: Método que lo produjo
        model_handle: Modelo usado (Spade4Model o BenchmarkFit)
    """

    horizon_days: int = Field(ge=1)
    values: FloatArray
    start_day: float = 0.0
    dt: float = Field(default=1.0, gt=0)
    method: str = "spade4"
    model_handle: Any = None

    @model_validator(mode="after")
    def _horizon_length(self) -> "ForecastResult":
        if self.values.shape != (self.horizon_days,):
            raise ValueError("values length must equal horizon_days")
        return self

    @property
    def days(self) -> np.ndarray:
        return self.start_day + self.dt * np.arange(self.horizon_days)

    def as_series(self) -> TimeSeries:
        return TimeSeries(t0=self.start_day, dt=self.dt, values=self.values)


class BacktestResiduals(_Frozen):
    """
    Errores firmados de los backtests, ``V[lead, backtest]``.

    La columna i guarda los errores del pronóstico lanzado desde el prefijo
    de largo m1 + i (i 0-based).
    """

    V: FloatArray
    m1: int = Field(ge=1)
    m2: int = Field(ge=1)

    @model_validator(mode="after")
    def _shape(self) -> "BacktestResiduals":
        if self.V.ndim != 2:
            raise ValueError("V must be a matrix")
        if not self.m1 < self.m2 - self.V.shape[0]:
            raise ValueError("m1 must be smaller than m2 - T")
        if self.V.shape[1] != self.m2 - self.m1 - self.V.shape[0]:
            raise ValueError("V must have m2 - m1 - T columns")
        return self


class IntervalResult(_Frozen):
    """
    Banda de predicción de 95% alrededor del pronóstico puntual.

    Attributes:
        point: Pronóstico desde el prefijo completo
        sigma: Desvío estimado por horizonte (RMS de los backtests)
        lo: Límite inferior (truncado en 0)
        hi: Límite superior
        residuals: Errores de backtest que originaron sigma
    """

    point: ForecastResult
    sigma: FloatArray
    lo: FloatArray
    hi: FloatArray
    residuals: Optional[BacktestResiduals] = None

    @model_validator(mode="after")
    def _ordered_band(self) -> "IntervalResult":
        if np.any(self.sigma < 0):
            raise ValueError("sigma must be non-negative")
        if np.any(self.lo > self.point.values) or np.any(self.point.values > self.hi):
            raise ValueError("band must contain the point forecast")
        return self


# ---------------------------------------------------------------------------
# Benchmarks
# ---------------------------------------------------------------------------


class FitSpec(_Frozen):
    """
    Especificación de un ajuste benchmark por mínimos cuadrados.

    Attributes:
        model_kind: SEIR, SμEIR o SEIR con beta(t)
        target_kind: ``active`` ajusta I(t); ``cumulative`` ajusta I(t) + R(t)
        restarts: Inicializaciones aleatorias por candidato de E(0)
        e0_grid_multipliers: Multiplicadores k de E(0) = k * I0
        q_grid: Órdenes de Legendre candidatos (solo SEIR con beta(t))
        seed: Semilla base; cada reinicio deriva la suya
        max_iter: Iteraciones de Nelder–Mead por reinicio
        tol: Tolerancia de Nelder–Mead sobre el simplex y la pérdida
        step: Paso de RK4 (días)
        n_jobs: Workers de joblib para los reinicios
    """

    model_kind: ModelKind
    target_kind: TargetKind = TargetKind.ACTIVE
    restarts: int = Field(default=100, ge=1)
    e0_grid_multipliers: Tuple[float, ...] = Field(
        default=DEFAULT_E0_MULTIPLIERS, min_length=1
    )
    q_grid: Tuple[int, ...] = Field(default=DEFAULT_Q_GRID, min_length=1)
    seed: int = Field(default=0, ge=0)
    max_iter: int = Field(default=2000, ge=1)
    tol: float = Field(default=1e-10, gt=0)
    step: float = Field(default=0.01, gt=0)
    n_jobs: int = 1

    @field_validator("e0_grid_multipliers")
    @classmethod
    def _non_negative_multipliers(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(k < 0 for k in value):
            raise ValueError("E(0) multipliers must be >= 0")
        return value

    @field_validator("q_grid")
    @classmethod
    def _non_negative_orders(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(q < 0 for q in value):
            raise ValueError("Legendre orders must be >= 0")
        return value


class BenchmarkFit(_Frozen):
    """
    Resultado de un ajuste benchmark.

    Attributes:
        model_kind: Modelo ajustado
        target_kind: Variable ajustada (I o I + R)
        beta: Tasa de infección constante (SEIR, SμEIR)
        xi: Pesos de Legendre (SEIR con beta(t))
        sigma: Tasa de latencia
        gamma: Tasa de remoción
        mu: Tasa de descubrimiento (SμEIR)
        e0: E(t0) elegido
        i0: I(t0), primera observación
        population: Población en las unidades de la observable
        train_sse: Error cuadrático final sobre el entrenamiento
        q: Orden de Legendre elegido
        t_min: Inicio del dominio de beta(t)
        t_max: Fin del dominio de beta(t)
        step: Paso de integración usado
        n_train: Muestras de entrenamiento
        dt: Paso de muestreo de la serie
        bic: BIC del ajuste (n ln(SSE/n) + k ln n)
        e0_sse: Mejor SSE por multiplicador de E(0)
    """

    model_kind: ModelKind
    target_kind: TargetKind
    beta: Optional[float] = None
    xi: Optional[Tuple[float, ...]] = None
    sigma: float = Field(gt=0)
    gamma: float = Field(gt=0)
    mu: Optional[float] = None
    e0: float = Field(ge=0)
    i0: float = Field(ge=0)
    population: float = Field(gt=0)
    train_sse: float = Field(ge=0)
    q: Optional[int] = None
    t_min: float = 0.0
    t_max: float = 1.0
    step: float = 0.01
    n_train: int = 1
    dt: float = 1.0
    bic: Optional[float] = None
    e0_sse: Dict[float, float] = Field(default_factory=dict)

    @property
    def n_parameters(self) -> int:
        if self.model_kind is ModelKind.SEIR_BETA_T:
            return len(self.xi or ()) + 2
        return 4 if self.model_kind is ModelKind.SUEIR else 3

    def params(self) -> Union[SeirParams, SueirParams]:
        """Registro de parámetros para las funciones de ``spade4.services.ode``."""
        if self.model_kind is ModelKind.SUEIR:
            return SueirParams(
                beta=self.beta,
                sigma=self.sigma,
                gamma=self.gamma,
                mu=self.mu,
                population=self.population,
            )
        if self.model_kind is ModelKind.SEIR_BETA_T:
            beta = TransmissionBasis(coeffs=self.xi, t_min=self.t_min, t_max=self.t_max)
            return SeirParams(
                beta=beta, sigma=self.sigma, gamma=self.gamma, population=self.population
            )
        return SeirParams(
            beta=self.beta, sigma=self.sigma, gamma=self.gamma, population=self.population
        )

    def initial_state(self) -> CompartmentState:
        """Estado en t0 = 0: S = P - E - I, R = 0."""
        return CompartmentState(
            S=max(self.population - self.e0 - self.i0, 0.0),
            E=self.e0,
            I=self.i0,
            R=0.0,
            t=0.0,
        )
