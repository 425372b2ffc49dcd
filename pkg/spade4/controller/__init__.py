"""Orquestación de experimentos para la CLI."""
