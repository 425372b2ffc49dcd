"""
Middleware personalizado de la API.

Uso:
    from spade4.middleware import LoggingMiddleware
    app.add_middleware(LoggingMiddleware)
"""
from .logging_middleware import LoggingMiddleware

__all__ = ["LoggingMiddleware"]
