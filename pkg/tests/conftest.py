"""
Configuración compartida para tests con pytest.

Fixtures:
- client_fixture: TestClient de la API
- synthetic_truth: la serie sintética SμEIR de referencia (180 días, sin ruido)
- fast_rfm: RfmConfig chico para que los ajustes de los tests tarden poco
- write_series: helper para escribir CSVs de prueba
"""
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from spade4.main import app
from spade4.models import CompartmentState, RfmConfig, SueirParams
from spade4.services.ode import simulate_sueir_observable

client = TestClient(app)

SYNTHETIC_PARAMS = SueirParams(
    beta=3 / 14, sigma=0.25, gamma=1 / 14, mu=0.75, population=1e6 + 1
)
SYNTHETIC_INITIAL = CompartmentState(S=1e6, E=0.0, I=1.0, R=0.0)


@pytest.fixture
def client_fixture():
    """
    Cliente de test para hacer requests HTTP.

    Returns:
        TestClient: Cliente de test de FastAPI
    """
    return client


@pytest.fixture(scope="session")
def synthetic_truth():
    """Serie diaria I(t)/P del escenario de referencia sobre [0, 180]."""
    return simulate_sueir_observable(SYNTHETIC_PARAMS, SYNTHETIC_INITIAL, 180)


@pytest.fixture
def fast_rfm():
    """Pocos features y pocos barridos: alcanza para probar el pipeline."""
    return RfmConfig(n_features=200, seed=3, max_iter=5000, tol=1e-9)


@pytest.fixture
def write_series(tmp_path):
    """Escribir un CSV crudo en tmp_path y devolver su ruta."""

    def _write(text: str, name: str = "series.csv") -> Path:
        path = tmp_path / name
        path.write_bytes(text.encode("utf-8"))
        return path

    return _write
