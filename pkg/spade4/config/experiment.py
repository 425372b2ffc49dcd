"""
Configuración de experimentos.

Un experimento queda determinado por un archivo plano ``clave = valor``
(comentarios con ``#``), leído con python-dotenv. La clave opcional
``preset`` trae los metadatos de un dataset conocido; las claves del archivo
pisan al preset y los overrides de la CLI pisan al archivo.

Semillas: cada corrida deriva la suya de la semilla maestra y de los índices
(método, m, repetición) con ``numpy.random.SeedSequence``, de modo que el
orden de ejecución en paralelo no cambia los resultados.
"""

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from spade4.config.config import settings
from spade4.exceptions import ConfigError
from spade4.models import (
    DEFAULT_E0_MULTIPLIERS,
    DEFAULT_LAMBDA_GRID,
    DEFAULT_Q_GRID,
    Activation,
    CompartmentState,
    EmbeddingConfig,
    FitSpec,
    ModelKind,
    NormalizationSpec,
    RfmConfig,
    SueirParams,
    TargetKind,
)

SYNTHETIC = "synthetic"
METHODS = ("spade4", "seir", "sueir", "seir_beta_t")

# Índices fijos del esquema de semillas; "noise" no es un método pero usa el mismo contador.
SEED_STREAMS = {"spade4": 0, "seir": 1, "sueir": 2, "seir_beta_t": 3, "noise": 4}

_ALL_METHODS = ",".join(METHODS)

# Sintético con ruido: promedio de 7 días y derivada suavizada con s = 15,
# salvo que la config diga otra cosa.
NOISY_SYNTHETIC_DEFAULTS: Dict[str, Any] = {"seven_day_average": True, "smooth_s": 15}

PRESETS: Dict[str, Dict[str, str]] = {
    "ebola-guinea": {
        "dataset": "data/ebola_guinea.csv",
        "population": "135e6",
        "scale_fraction": "1e-3",
        "target": "cumulative",
        "smooth_s": "10",
        "train_sizes": "172, 286",
        "methods": _ALL_METHODS,
        "interval_m1": "266",
        "interval_m2": "286",
    },
    "zika-giradot": {
        "dataset": "data/zika_giradot.csv",
        "population": "95e3",
        "scale_fraction": "1",
        "target": "cumulative",
        "smooth_s": "10",
        "train_sizes": "27, 65",
        "methods": _ALL_METHODS,
        "interval_m1": "45",
        "interval_m2": "65",
    },
    "flu-china": {
        "dataset": "data/flu_china.csv",
        "population": "7e8",
        "scale_fraction": "1e-5",
        "target": "cumulative",
        "smooth_s": "10",
        "train_sizes": "38, 44, 64",
        "methods": _ALL_METHODS,
        "interval_m1": "44",
        "interval_m2": "64",
    },
    "covid-canada-w2": {
        "dataset": "data/covid_canada.csv",
        "wave_window": "200, 380",
        "seven_day_average": "true",
        "population": "3.8e7",
        "scale_fraction": "0.1",
        "target": "active",
        "train_sizes": "54, 90, 99, 108, 117, 126, 135, 144",
        "methods": _ALL_METHODS,
    },
    "covid-canada-w5": {
        "dataset": "data/covid_canada.csv",
        "wave_window": "650, 704",
        "seven_day_average": "true",
        "population": "3.8e7",
        "scale_fraction": "0.1",
        "target": "active",
        "train_sizes": "27, 32, 35, 38, 41, 43, 46",
        "methods": _ALL_METHODS,
    },
    "synthetic-sueir": {
        "dataset": SYNTHETIC,
        "population": "1000001",
        "target": "active",
        "train_sizes": "81, 97, 100, 104, 108, 111, 125",
        "methods": "spade4, seir, sueir",
    },
}


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return tuple(item.strip() for item in value.split(",") if item.strip())
    return value


class ExperimentConfig(BaseModel):
    """
    Todo lo que define una corrida de experimento.

    Las claves desconocidas son un error. Los valores de lista se escriben
    separados por comas (``train_sizes = 54, 90, 99``).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    preset: Optional[str] = None

    # Datos
    dataset: str = SYNTHETIC
    wave_window: Optional[Tuple[int, int]] = None
    seven_day_average: bool = False
    population: float = Field(default=1_000_001.0, gt=0)
    scale_fraction: float = Field(default=1.0, gt=0, le=1)
    target: TargetKind = TargetKind.ACTIVE
    eta: float = Field(default=0.0, ge=0)
    repetitions: int = Field(default=1, ge=1)

    # Grilla del experimento
    train_sizes: Tuple[int, ...] = Field(default=(81,), min_length=1)
    methods: Tuple[str, ...] = Field(default=("spade4",), min_length=1)
    horizon: int = Field(default=7, ge=1)

    # Embedding
    p: int = Field(default=9, ge=1)
    tau: int = Field(default=1, ge=1)
    smooth_s: int = Field(default=1, ge=1)
    centered_smoothing: bool = False

    # Random features
    n_features: Optional[int] = Field(default=None, ge=1)
    features_per_sample: int = Field(default=50, ge=1)
    feature_cap: Optional[int] = Field(default=None, ge=1)
    lambda_grid: Tuple[float, ...] = Field(default=DEFAULT_LAMBDA_GRID, min_length=1)
    activation: Activation = Activation.RELU
    scaled_objective: bool = False
    lasso_tol: float = Field(default=1e-10, gt=0)
    lasso_max_iter: int = Field(default=100_000, ge=1)

    # Benchmarks
    restarts: int = Field(default=100, ge=1)
    e0_multipliers: Tuple[float, ...] = Field(default=DEFAULT_E0_MULTIPLIERS, min_length=1)
    q_grid: Tuple[int, ...] = Field(default=DEFAULT_Q_GRID, min_length=1)
    fit_max_iter: int = Field(default=2000, ge=1)
    fit_tol: float = Field(default=1e-10, gt=0)

    # Datos sintéticos
    beta: float = Field(default=3 / 14, ge=0)
    sigma: float = Field(default=0.25, gt=0)
    gamma: float = Field(default=1 / 14, gt=0)
    mu: float = Field(default=0.75, ge=0, le=1)
    s0: float = Field(default=1e6, ge=0)
    e0: float = Field(default=0.0, ge=0)
    i0: float = Field(default=1.0, ge=0)
    r0: float = Field(default=0.0, ge=0)
    sim_days: int = Field(default=180, ge=1)
    step: float = Field(default=0.01, gt=0)

    # Intervalos, estabilidad, barrido de p
    interval_m1: Optional[int] = Field(default=None, ge=1)
    interval_m2: Optional[int] = Field(default=None, ge=1)
    backtest_window: int = Field(default=20, ge=1)
    interval_z: float = Field(default=1.96, ge=0)
    stability_runs: int = Field(default=100, ge=1)
    p_values: Tuple[int, ...] = Field(default=(5, 7, 9, 11, 14), min_length=1)

    # Corrida
    output_dir: str = Field(default_factory=lambda: settings.output_dir)
    seed: int = Field(default_factory=lambda: settings.default_seed, ge=0)
    n_jobs: int = Field(default_factory=lambda: settings.n_jobs)

    @field_validator(
        "wave_window",
        "train_sizes",
        "methods",
        "lambda_grid",
        "e0_multipliers",
        "q_grid",
        "p_values",
        mode="before",
    )
    @classmethod
    def _parse_list(cls, value: Any) -> Any:
        return _split_list(value)

    @field_validator(
        "n_features", "feature_cap", "interval_m1", "interval_m2", "preset", mode="before"
    )
    @classmethod
    def _blank_is_none(cls, value: Any) -> Any:
        if isinstance(value, str) and not value.strip():
            return None
        return value

    @field_validator("methods")
    @classmethod
    def _known_methods(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        unknown = [m for m in value if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {list(METHODS)}")
        return value

    @field_validator("train_sizes", "p_values")
    @classmethod
    def _positive_sizes(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(v < 1 for v in value):
            raise ValueError("sizes must be >= 1")
        return value

    @model_validator(mode="before")
    @classmethod
    def _noisy_synthetic_defaults(cls, data: Any) -> Any:
        if not isinstance(data, dict) or data.get("dataset", SYNTHETIC) != SYNTHETIC:
            return data
        try:
            noisy = float(data.get("eta", 0.0)) > 0
        except (TypeError, ValueError):
            return data
        if noisy:
            data = {**NOISY_SYNTHETIC_DEFAULTS, **data}
        return data

    @model_validator(mode="after")
    def _consistent(self) -> "ExperimentConfig":
        span = (self.p - 1) * self.tau + 1
        small = [m for m in self.train_sizes if m < span + 1]
        if small:
            raise ValueError(f"train_sizes {small} are smaller than p + 1 = {span + 1}")
        if self.wave_window is not None and self.wave_window[0] > self.wave_window[1]:
            raise ValueError("wave_window start is after its end")
        if self.eta > 0 and not self.is_synthetic:
            raise ValueError("noise injection (eta > 0) only applies to the synthetic dataset")
        if self.n_jobs == 0:
            raise ValueError("n_jobs must be a positive count or -1")
        return self

    # -- constructores de los tipos de dominio --------------------------------

    @property
    def is_synthetic(self) -> bool:
        return self.dataset == SYNTHETIC

    @property
    def benchmark_population(self) -> float:
        """P expresada en las unidades de la observable normalizada."""
        return 1.0 if self.is_synthetic else 1.0 / self.scale_fraction

    def normalization(self) -> NormalizationSpec:
        return NormalizationSpec(population=self.population, scale_fraction=self.scale_fraction)

    def embedding(self, p: Optional[int] = None) -> EmbeddingConfig:
        return EmbeddingConfig(
            p=p or self.p,
            tau=self.tau,
            smooth_s=self.smooth_s,
            centered_smoothing=self.centered_smoothing,
        )

    def rfm(self, seed: int) -> RfmConfig:
        return RfmConfig(
            n_features=self.n_features,
            features_per_sample=self.features_per_sample,
            feature_cap=self.feature_cap,
            seed=seed,
            lambda_grid=self.lambda_grid,
            activation=self.activation,
            tol=self.lasso_tol,
            max_iter=self.lasso_max_iter,
            scaled_objective=self.scaled_objective,
        )

    def fit_spec(self, method: str, seed: int) -> FitSpec:
        return FitSpec(
            model_kind=ModelKind(method),
            target_kind=self.target,
            restarts=self.restarts,
            e0_grid_multipliers=self.e0_multipliers,
            q_grid=self.q_grid,
            seed=seed,
            max_iter=self.fit_max_iter,
            tol=self.fit_tol,
            step=self.step,
        )

    def synthetic_params(self) -> SueirParams:
        return SueirParams(
            beta=self.beta,
            sigma=self.sigma,
            gamma=self.gamma,
            mu=self.mu,
            population=self.s0 + self.e0 + self.i0 + self.r0,
        )

    def synthetic_initial(self) -> CompartmentState:
        return CompartmentState(S=self.s0, E=self.e0, I=self.i0, R=self.r0, t=0.0)

    def interval_window(self) -> Tuple[int, int]:
        """(m1, m2): explícitos o ``m2 = max(train_sizes)``, ``m1 = m2 - backtest_window``."""
        m2 = self.interval_m2 or max(self.train_sizes)
        m1 = self.interval_m1 or m2 - self.backtest_window
        return m1, m2


def load_experiment_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    """
    Leer y validar una config de experimento.

    Args:
        path: Archivo ``clave = valor``; sin archivo se usan los defaults
        overrides: Valores que pisan al archivo (``None`` se ignora)

    Raises:
        ConfigError: archivo ilegible, preset desconocido, clave desconocida
            o valor inválido
    """
    raw: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            values = dotenv_values(path, encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for key, value in values.items():
            if value is None:
                raise ConfigError(f"{path}: key '{key}' has no value")
            raw[key.strip().lower()] = value

    merged: Dict[str, Any] = {}
    preset = raw.get("preset")
    if preset:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset '{preset}'; choose from {sorted(PRESETS)}")
        merged.update(PRESETS[preset])
    merged.update(raw)
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})

    try:
        return ExperimentConfig(**merged)
    except ValidationError as exc:
        details = "; ".join(
            f"{'.'.join(str(part) for part in err['loc']) or 'config'}: {err['msg']}"
            for err in exc.errors()
        )
        raise ConfigError(f"invalid experiment config: {details}") from exc


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 del dump JSON canónico; ``output_dir`` no participa."""
    payload = config.model_dump(mode="json", exclude={"output_dir"})
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def derive_seed(master: int, stream: str, m: int = 0, repetition: int = 0) -> int:
    """Semilla de 32 bits para (flujo, m, repetición) a partir de la maestra."""
    if stream not in SEED_STREAMS:
        raise ConfigError(f"unknown seed stream '{stream}'")
    sequence = np.random.SeedSequence([master, SEED_STREAMS[stream], m, repetition])
    return int(sequence.generate_state(1)[0])
