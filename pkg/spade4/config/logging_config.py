"""
Configuración del sistema de logging usando Loguru.

Este módulo configura el logging de todo el toolkit:
- Integra Loguru con el logging estándar de Python (uvicorn, numba, joblib)
- Configura rotación automática de archivos cuando se pide
- Proporciona funciones especializadas para eventos del pipeline

Funciones principales:
- setup_logging(): Configura el sistema completo
- log_run_event(): Hitos del pipeline (ajuste terminado, lambda elegido, archivo escrito)
- log_error(): Manejo centralizado de errores
- log_request() / log_response(): Usadas por el middleware HTTP
"""

import logging
import sys
from typing import Any, Dict, Optional

from loguru import logger

from spade4.config.config import settings


class InterceptHandler(logging.Handler):
    """
    Intercepta logs de otras librerías y los redirige a Loguru.

    Así uvicorn, numba o joblib, que usan el logging estándar, terminan
    en los mismos sinks y con el mismo formato que el resto del toolkit.
    """

    def emit(self, record):
        # Get corresponding Loguru level if it exists
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno

        # Find caller from where originated the logged message
        frame, depth = logging.currentframe(), 2
        while frame.f_code.co_filename == logging.__file__:
            frame = frame.f_back
            depth += 1

        logger.opt(depth=depth, exception=record.exc_info).log(
            level, record.getMessage()
        )


LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> | "
    "<level>{message}</level>"
)


def _stderr_sink(message: str) -> None:
    # sys.stderr se resuelve en cada mensaje; pytest lo reemplaza
    sys.stderr.write(message)


def setup_logging(level: Optional[str] = None):
    """
    Configurar el sistema de logging completo.

    Configura Loguru como el manejador principal de logs con:
    - Handler de consola con colores (stderr, para no mezclarse con CSV en stdout)
    - Handlers de archivos rotativos si ``settings.log_to_file``
    - Interceptor para librerías externas

    Args:
        level: Nivel de consola; por defecto DEBUG en modo debug o
            ``settings.log_level``

    Returns:
        logger: Instancia configurada de Loguru
    """
    logger.remove()

    for handler in logging.root.handlers[:]:
        logging.root.removeHandler(handler)

    console_level = level or ("DEBUG" if settings.debug else settings.log_level)
    logger.add(
        _stderr_sink,
        format=LOG_FORMAT,
        level=console_level,
        colorize=sys.stderr.isatty(),
        backtrace=True,
        diagnose=settings.debug,
        filter=lambda record: not record["name"].startswith("uvicorn.access"),
    )

    if settings.log_to_file:
        logger.add(
            f"{settings.log_dir}/spade4.log",
            format=LOG_FORMAT,
            level="INFO",
            rotation="1 day",
            retention="30 days",
            compression="zip",
            backtrace=True,
            diagnose=False,
        )

        # Archivo separado para errores
        logger.add(
            f"{settings.log_dir}/errors.log",
            format=LOG_FORMAT,
            level="ERROR",
            rotation="1 week",
            retention="1 month",
            compression="zip",
            backtrace=True,
            diagnose=False,
        )

    logging.basicConfig(handlers=[InterceptHandler()], level=0, force=True)

    for logger_name in ["uvicorn", "uvicorn.error", "fastapi"]:
        logging_logger = logging.getLogger(logger_name)
        logging_logger.handlers = [InterceptHandler()]
        logging_logger.propagate = False

    logging.getLogger("uvicorn.access").setLevel(logging.WARNING)
    # numba es muy verboso en DEBUG
    logging.getLogger("numba").setLevel(logging.WARNING)

    return logger


def log_run_event(event_name: str, data: Optional[Dict[str, Any]] = None):
    """
    Log de hitos del pipeline.

    Usar para eventos significativos: ajuste terminado, lambda elegido,
    resumen de reinicios de un benchmark, archivo de resultados escrito.

    Args:
        event_name: Nombre del evento
        data: Datos específicos del evento (opcional)
    """
    payload = data or {}
    logger.bind(event_type="run", event_name=event_name, event_data=payload).info(
        f"Run event: {event_name} {payload}"
    )


def log_error(error: Exception, context: Optional[Dict[str, Any]] = None):
    """
    Log de errores con contexto detallado.

    Args:
        error: Excepción que se produjo
        context: Información adicional sobre el contexto del error (opcional)
    """
    logger.bind(
        event_type="error",
        error_type=type(error).__name__,
        context=context or {},
    ).error(f"Error occurred: {type(error).__name__}: {error}")


def log_request(request_data: Dict[str, Any]):
    """
    Log de requests HTTP con información contextual.

    Args:
        request_data: Diccionario con datos del request (método, URL, cliente)
    """
    logger.bind(event_type="request", request_data=request_data).debug(
        f"Request received: {request_data.get('method')} {request_data.get('url')}"
    )


def log_response(response_data: Dict[str, Any], status_code: int):
    """
    Log de responses HTTP.

    Args:
        response_data: Diccionario con datos del response
        status_code: Código de estado HTTP de la respuesta
    """
    logger.bind(
        event_type="response", response_data=response_data, status_code=status_code
    ).debug(f"Response sent with status {status_code}")
