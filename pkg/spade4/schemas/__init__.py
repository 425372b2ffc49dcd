"""Schemas JSON de la API."""
