"""
Aplicación principal FastAPI.

Expone las operaciones del toolkit como endpoints JSON: middleware, manejo
de errores, eventos de lifecycle y endpoints básicos.
"""

from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from loguru import logger
from pydantic import ValidationError

from spade4.api import api_router
from spade4.config.config import settings
from spade4.config.logging_config import log_error, log_run_event, setup_logging
from spade4.exceptions import Spade4Error
from spade4.middleware import LoggingMiddleware


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Eventos de inicio y cierre de la aplicación.

    Args:
        app: Instancia de la aplicación FastAPI
    """
    setup_logging()
    logger.info("Starting spade4 API...")
    log_run_event("application_startup", {"version": settings.app_version})

    yield

    logger.info("Shutting down spade4 API...")
    log_run_event("application_shutdown")


def create_application() -> FastAPI:
    """
    Factory para crear la aplicación FastAPI.

    Configura middleware (CORS, logging), rutas y manejo de errores.

    Returns:
        FastAPI: Instancia configurada de la aplicación

    Note:
        - La documentación se habilita solo en modo debug
        - Los errores del toolkit (datos inválidos, divergencias) responden 422
    """
    app = FastAPI(
        title=settings.app_name,
        version=settings.app_version,
        debug=settings.debug,
        lifespan=lifespan,
        docs_url="/docs" if settings.debug else None,
        redoc_url="/redoc" if settings.debug else None,
    )

    app.add_middleware(
        CORSMiddleware,
        allow_origins=settings.allowed_origins,
        allow_credentials=True,
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.add_middleware(LoggingMiddleware)

    app.include_router(api_router, prefix="/api/v1")

    @app.exception_handler(Spade4Error)
    async def toolkit_exception_handler(request, exc):
        """Errores de dominio: la entrada no admite el cálculo pedido."""
        log_error(exc, {"url": str(request.url), "method": request.method})
        return JSONResponse(
            status_code=422,
            content={"detail": str(exc), "error_type": type(exc).__name__},
        )

    @app.exception_handler(ValidationError)
    async def domain_validation_handler(request, exc):
        log_error(exc, {"url": str(request.url), "method": request.method})
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(HTTPException)
    async def http_exception_handler(request, exc):
        log_error(exc, {"url": str(request.url), "method": request.method})
        return JSONResponse(status_code=exc.status_code, content={"detail": exc.detail})

    @app.exception_handler(Exception)
    async def general_exception_handler(request, exc):
        """
        Manejo de excepciones no controladas.

        Registra el error completo y devuelve un 500 genérico.
        """
        log_error(exc, {"url": str(request.url), "method": request.method})
        logger.error(f"Unhandled exception: {exc}")
        return JSONResponse(status_code=500, content={"detail": "Internal server error"})

    @app.get("/")
    async def root():
        """Mensaje de bienvenida con nombre y versión."""
        logger.info("Root endpoint accessed")
        return {"message": f"Welcome to {settings.app_name} v{settings.app_version}"}

    @app.get("/health")
    async def health_check():
        """
        Health check para monitoreo.

        Returns:
            dict: Estado de la aplicación y versión
        """
        logger.debug("Health check performed")
        return {"status": "healthy", "version": settings.app_version}

    return app


# Instancia global de la aplicación
app = create_application()
