"""Configuración de proceso, logging y experimentos."""
