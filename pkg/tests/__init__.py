"""
Paquete de tests del toolkit.

Estructura de tests:
- test_timeseries.py, test_ode.py, test_embedding.py, test_rfm.py,
  test_forecaster.py, test_benchmarks.py, test_intervals.py: un archivo por servicio
- test_config.py: settings y configuración de experimentos
- test_cli.py: comandos de punta a punta sobre el dataset sintético
- test_main.py: endpoints de la API
- conftest.py: fixtures compartidas

Para ejecutar los tests:
    pytest
    pytest -m "not slow"   # Sin las corridas largas de aceptación
    pytest -v              # Verbose
"""
# Tests package
