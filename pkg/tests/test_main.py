"""
Tests principales de la aplicación FastAPI.

Este módulo contiene tests de integración para los endpoints de la API:
básicos, simulación, pronóstico, intervalos y error relativo.

Tests incluidos:
- test_root_endpoint: Test del endpoint raíz
- test_health_check: Test del health check
- test_simulate_*: Serie sintética SμEIR
- test_forecast_*: Pronóstico SPADE4 con features reducidos
- test_relative_error_*: Métrica y sus errores de dominio

Los tests usan el fixture client_fixture que proporciona un cliente
de test sobre la aplicación global.
"""
import pytest

from tests.conftest import client

PREFIX = "/api/v1/forecasts"
SMALL_RFM = {"n_features": 200, "seed": 3}


def test_root_endpoint(client_fixture):
    """Test del endpoint raíz"""
    response = client_fixture.get("/")
    assert response.status_code == 200
    assert "message" in response.json()


def test_health_check(client_fixture):
    """
    Test del endpoint de health check.

    Verifica que el endpoint /health responda correctamente
    con status healthy y información de versión.

    Args:
        client_fixture: Cliente de test proporcionado por pytest
    """
    response = client_fixture.get("/health")
    assert response.status_code == 200
    data = response.json()
    assert data["status"] == "healthy"
    assert "version" in data


def test_simulate_default_scenario(client_fixture):
    """
    Test de la serie sintética por defecto.

    Verifica 181 valores diarios, el valor inicial 1/P y que el pico caiga
    dentro de la ventana de tamaños de entrenamiento alrededor del pico.
    """
    response = client_fixture.post(f"{PREFIX}/simulate", json={})
    assert response.status_code == 200
    data = response.json()
    values = data["values"]
    assert len(values) == 181
    assert data["dt"] == 1.0
    assert values[0] == pytest.approx(1 / (1e6 + 1), abs=1e-12)
    assert 97 <= values.index(max(values)) <= 111


def test_simulate_with_noise_is_reproducible(client_fixture):
    payload = {"horizon_days": 30, "eta": 0.05, "noise_seed": 4}
    first = client_fixture.post(f"{PREFIX}/simulate", json=payload).json()
    second = client_fixture.post(f"{PREFIX}/simulate", json=payload).json()
    assert first["values"] == second["values"]


def test_simulate_rejects_invalid_mu(client_fixture):
    response = client_fixture.post(f"{PREFIX}/simulate", json={"mu": 1.5})
    assert response.status_code == 422


def test_forecast_spade4(client_fixture):
    """
    Test de pronóstico SPADE4 sobre los primeros 40 días sintéticos.

    Verifica horizonte, días y valores no negativos.
    """
    series = client_fixture.post(f"{PREFIX}/simulate", json={"horizon_days": 39}).json()
    payload = {"series": series, "horizon": 7, "rfm": SMALL_RFM}
    response = client_fixture.post(f"{PREFIX}/spade4", json=payload)
    assert response.status_code == 200
    data = response.json()
    assert data["method"] == "spade4"
    assert data["days"] == [40.0, 41.0, 42.0, 43.0, 44.0, 45.0, 46.0]
    assert all(value >= 0 for value in data["values"])
    assert data["lam"] in (1e-6, 5e-6, 1e-7, 5e-7, 1e-8, 5e-8, 1e-9, 5e-9)


def test_forecast_short_series_is_unprocessable(client_fixture):
    payload = {"series": {"values": [0.1, 0.2, 0.3]}, "rfm": SMALL_RFM}
    response = client.post(f"{PREFIX}/spade4", json=payload)
    assert response.status_code == 422
    assert response.json()["error_type"] == "InsufficientDataError"


def test_interval_constant_series(client_fixture):
    payload = {
        "series": {"values": [0.5] * 24},
        "m1": 8,
        "embedding": {"p": 3},
        "rfm": SMALL_RFM,
    }
    response = client_fixture.post(f"{PREFIX}/intervals", json=payload)
    assert response.status_code == 200
    data = response.json()
    assert data["m2"] == 24
    assert data["point"] == pytest.approx([0.5] * 7)
    assert data["lo95"] == pytest.approx(data["point"])
    assert data["hi95"] == pytest.approx(data["point"])


def test_relative_error_example(client_fixture):
    payload = {"truth": [1.0, 2.0, 3.0], "predicted": [2.0, 4.0, 6.0]}
    response = client_fixture.post(f"{PREFIX}/relative-error", json=payload)
    assert response.status_code == 200
    assert response.json()["relative_error"] == pytest.approx(1.0)


def test_relative_error_length_mismatch(client_fixture):
    payload = {"truth": [1.0, 2.0], "predicted": [1.0]}
    response = client_fixture.post(f"{PREFIX}/relative-error", json=payload)
    assert response.status_code == 422
    assert response.json()["error_type"] == "DimensionMismatchError"


def test_relative_error_zero_truth(client_fixture):
    payload = {"truth": [0.0, 0.0], "predicted": [1.0, 1.0]}
    response = client_fixture.post(f"{PREFIX}/relative-error", json=payload)
    assert response.status_code == 422
    assert response.json()["error_type"] == "ZeroDenominatorError"
