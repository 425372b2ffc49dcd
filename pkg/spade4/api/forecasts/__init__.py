"""Endpoints de pronóstico, intervalos y simulación."""
