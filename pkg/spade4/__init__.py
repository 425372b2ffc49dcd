"""
Toolkit SPADE4 de pronóstico epidémico.

Pronostica trayectorias de corto plazo a partir de una única serie observada
(casos activos o acumulados) con embedding por retardos y regresión dispersa
sobre random features, y lo compara con ajustes de modelos compartimentales.

Estructura:
- config/: Settings de proceso, logging y configuración de experimentos
- models/: Tipos de dominio (pydantic, inmutables)
- services/: Series, ODEs, embedding, random features, pronosticadores, intervalos
- controller/: Comandos de experimento que escriben CSVs
- api/, schemas/, middleware/, main.py: API HTTP
- cli.py: Punto de entrada de línea de comandos
"""

__version__ = "0.1.0"
