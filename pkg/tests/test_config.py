"""
Tests de la configuración de proceso y de experimentos.
"""
import logging
from pathlib import Path

import pytest
from pydantic import ValidationError

from spade4.config.config import Settings
from spade4.config.experiment import (
    ExperimentConfig,
    config_hash,
    derive_seed,
    load_experiment_config,
)
from spade4.config.logging_config import setup_logging
from spade4.controller.experiments import load_observations
from spade4.exceptions import ConfigError
from spade4.models import TargetKind

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"
COVID_CSV = Path(__file__).resolve().parents[1] / "data" / "covid_canada.csv"


@pytest.fixture
def write_config(tmp_path):
    def _write(text: str):
        path = tmp_path / "experiment.conf"
        path.write_text(text, encoding="utf-8")
        return path

    return _write


def test_defaults_describe_synthetic_run():
    config = load_experiment_config()
    assert config.is_synthetic
    assert config.benchmark_population == 1.0
    assert config.train_sizes == (81,)
    assert config.embedding().span == 9


def test_preset_fills_dataset_metadata(write_config):
    config = load_experiment_config(write_config("preset = covid-canada-w2\n"))
    assert config.wave_window == (200, 380)
    assert config.seven_day_average is True
    assert config.target is TargetKind.ACTIVE
    assert config.train_sizes[0] == 54
    assert config.benchmark_population == pytest.approx(10.0)
    assert config.normalization().divisor == pytest.approx(3.8e6)


def test_file_overrides_preset_and_cli_overrides_file(write_config):
    path = write_config("# ebola\npreset = ebola-guinea\nsmooth_s = 4\nseed = 3\n")
    config = load_experiment_config(path, overrides={"seed": 9, "output_dir": None})
    assert config.smooth_s == 4
    assert config.seed == 9
    assert config.train_sizes == (172, 286)
    assert config.interval_window() == (266, 286)


def test_list_values_are_comma_separated(write_config):
    path = write_config("train_sizes = 20, 30,40\nmethods = spade4, seir\nlambda_grid = 1e-3\n")
    config = load_experiment_config(path)
    assert config.train_sizes == (20, 30, 40)
    assert config.methods == ("spade4", "seir")
    assert config.lambda_grid == (1e-3,)


def test_blank_optional_value_is_none(write_config):
    config = load_experiment_config(write_config("n_features =\n"))
    assert config.n_features is None


@pytest.mark.parametrize(
    "text",
    [
        "unknown_key = 1\n",
        "preset = nowhere\n",
        "methods = spade4, arima\n",
        "train_sizes = 5\n",
        "p = 0\n",
        "dataset = data/x.csv\neta = 0.05\n",
        "wave_window = 10, 5\n",
        "n_jobs = 0\n",
    ],
)
def test_invalid_configs_raise_config_error(write_config, text):
    with pytest.raises(ConfigError):
        load_experiment_config(write_config(text))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment_config(tmp_path / "absent.conf")


def test_noisy_synthetic_defaults_to_average_and_smoothing(write_config):
    config = load_experiment_config(write_config("eta = 0.05\n"))
    assert config.seven_day_average is True
    assert config.smooth_s == 15
    clean = load_experiment_config()
    assert clean.seven_day_average is False
    assert clean.smooth_s == 1


def test_noisy_synthetic_keeps_explicit_choices(write_config):
    path = write_config("eta = 0.02\nsmooth_s = 1\nseven_day_average = false\n")
    config = load_experiment_config(path)
    assert config.smooth_s == 1
    assert config.seven_day_average is False
    direct = ExperimentConfig(eta=0.05, smooth_s=4)
    assert (direct.smooth_s, direct.seven_day_average) == (4, True)


@pytest.mark.parametrize("name, eta", [("synthetic-noisy", 0.05), ("synthetic-noisy-2pct", 0.02)])
def test_shipped_noisy_configs(name, eta):
    config = load_experiment_config(CONFIG_DIR / f"{name}.conf")
    assert config.eta == eta
    assert config.seven_day_average is True
    assert config.smooth_s == 15
    assert config.repetitions == 20


def test_interval_window_defaults():
    config = ExperimentConfig(train_sizes=(40, 81))
    assert config.interval_window() == (61, 81)
    explicit = ExperimentConfig(train_sizes=(81,), interval_m1=50, interval_m2=70)
    assert explicit.interval_window() == (50, 70)


def test_config_hash_ignores_output_dir():
    a = ExperimentConfig(output_dir="one")
    b = ExperimentConfig(output_dir="two")
    c = ExperimentConfig(p=7)
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(c)
    assert len(config_hash(a)) == 64


def test_derive_seed_is_stable_and_separated():
    assert derive_seed(0, "spade4", 81, 0) == derive_seed(0, "spade4", 81, 0)
    seeds = {
        derive_seed(0, "spade4", 81, 0),
        derive_seed(0, "seir", 81, 0),
        derive_seed(0, "spade4", 97, 0),
        derive_seed(0, "spade4", 81, 1),
        derive_seed(1, "spade4", 81, 0),
    }
    assert len(seeds) == 5
    with pytest.raises(ConfigError):
        derive_seed(0, "arima")


def test_rfm_and_fit_spec_carry_config_values():
    config = ExperimentConfig(n_features=300, restarts=3, q_grid="1, 2")
    assert config.rfm(seed=4).resolve_n_features(81) == 300
    assert config.rfm(seed=4).seed == 4
    spec = config.fit_spec("seir_beta_t", seed=2)
    assert spec.restarts == 3
    assert spec.q_grid == (1, 2)


def test_settings_reject_zero_workers():
    with pytest.raises(ValidationError):
        Settings(n_jobs=0)


def test_settings_parse_origins():
    settings = Settings(allowed_origins_str="http://a, http://b,", log_level="debug")
    assert settings.allowed_origins == ["http://a", "http://b"]
    assert settings.log_level == "DEBUG"


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.conf")), ids=lambda p: p.stem)
def test_shipped_configs_are_valid(path):
    config = load_experiment_config(path)
    assert config.train_sizes


@pytest.mark.skipif(not COVID_CSV.is_file(), reason="snapshot de COVID no disponible")
def test_covid_wave_two_observations():
    config = load_experiment_config(
        CONFIG_DIR / "covid-canada-w2.conf", overrides={"dataset": str(COVID_CSV)}
    )
    truth, observed = load_observations(config)
    assert truth.m == 181
    assert truth.t0 == 0
    assert observed is truth


def test_setup_logging_quiets_noisy_libraries():
    setup_logging("DEBUG")
    try:
        assert logging.getLogger("numba").level == logging.WARNING
        assert logging.getLogger("uvicorn.access").level == logging.WARNING
    finally:
        setup_logging()
