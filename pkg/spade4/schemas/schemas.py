"""
Schemas de request/response de la API HTTP.

Son la frontera JSON: validan la entrada y la convierten a los tipos de
dominio de `spade4.models` con los métodos ``to_domain()``.
"""

from typing import List, Optional

from pydantic import BaseModel, Field

from spade4.models import (
    DEFAULT_LAMBDA_GRID,
    Activation,
    CompartmentState,
    EmbeddingConfig,
    RfmConfig,
    SueirParams,
    TargetKind,
    TimeSeries,
)

MAX_HORIZON = 365


class SeriesIn(BaseModel):
    """Serie uniforme: ``t_k = t0 + k*dt``."""

    t0: float = 0.0
    dt: float = Field(default=1.0, gt=0)
    values: List[float] = Field(min_length=1)

    def to_domain(self) -> TimeSeries:
        return TimeSeries(t0=self.t0, dt=self.dt, values=self.values)


class SeriesOut(BaseModel):
    t0: float
    dt: float
    values: List[float]


class EmbeddingIn(BaseModel):
    p: int = Field(default=9, ge=1)
    tau: int = Field(default=1, ge=1)
    smooth_s: int = Field(default=1, ge=1)
    centered_smoothing: bool = False

    def to_domain(self) -> EmbeddingConfig:
        return EmbeddingConfig(**self.model_dump())


class RfmIn(BaseModel):
    n_features: Optional[int] = Field(default=None, ge=1)
    features_per_sample: int = Field(default=50, ge=1)
    feature_cap: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0)
    lambda_grid: List[float] = Field(default=list(DEFAULT_LAMBDA_GRID), min_length=1)
    activation: Activation = Activation.RELU
    scaled_objective: bool = False

    def to_domain(self) -> RfmConfig:
        data = self.model_dump()
        data["lambda_grid"] = tuple(self.lambda_grid)
        return RfmConfig(**data)


class ForecastRequest(BaseModel):
    series: SeriesIn
    horizon: int = Field(default=7, ge=1, le=MAX_HORIZON)
    embedding: EmbeddingIn = Field(default_factory=EmbeddingIn)
    rfm: RfmIn = Field(default_factory=RfmIn)


class ForecastResponse(BaseModel):
    method: str
    days: List[float]
    values: List[float]
    lam: float
    nnz: int


class IntervalRequest(ForecastRequest):
    """``m2`` es el largo de la serie; los backtests arrancan en ``m1``."""

    m1: int = Field(ge=1)
    z: float = Field(default=1.96, ge=0)


class IntervalResponse(BaseModel):
    m1: int
    m2: int
    days: List[float]
    point: List[float]
    lo95: List[float]
    hi95: List[float]
    sigma: List[float]


class SimulateRequest(BaseModel):
    """Parámetros SμEIR y estado inicial; por defecto el escenario sintético de referencia."""

    beta: float = Field(default=3 / 14, ge=0)
    sigma: float = Field(default=0.25, gt=0)
    gamma: float = Field(default=1 / 14, gt=0)
    mu: float = Field(default=0.75, ge=0, le=1)
    s0: float = Field(default=1e6, ge=0)
    e0: float = Field(default=0.0, ge=0)
    i0: float = Field(default=1.0, ge=0)
    r0: float = Field(default=0.0, ge=0)
    horizon_days: int = Field(default=180, ge=1, le=3650)
    step: float = Field(default=0.01, gt=0, le=1)
    target: TargetKind = TargetKind.ACTIVE
    eta: float = Field(default=0.0, ge=0)
    noise_seed: int = Field(default=0, ge=0)

    def params(self) -> SueirParams:
        return SueirParams(
            beta=self.beta,
            sigma=self.sigma,
            gamma=self.gamma,
            mu=self.mu,
            population=self.s0 + self.e0 + self.i0 + self.r0,
        )

    def initial(self) -> CompartmentState:
        return CompartmentState(S=self.s0, E=self.e0, I=self.i0, R=self.r0)


class RelativeErrorRequest(BaseModel):
    truth: List[float] = Field(min_length=1)
    predicted: List[float] = Field(min_length=1)


class RelativeErrorResponse(BaseModel):
    relative_error: float
