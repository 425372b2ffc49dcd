"""Lógica numérica del toolkit: una función pura por operación."""
