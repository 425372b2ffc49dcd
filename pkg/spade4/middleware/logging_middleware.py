"""
Middleware de logging para FastAPI.

Registra cada request HTTP y su response, con el tiempo de procesamiento
y un nivel de log acorde al status code. Los pronósticos pueden tardar
segundos, así que el tiempo queda en el log de cada llamada.

Clases:
- LoggingMiddleware: Middleware ASGI para logging a nivel de aplicación
"""
import time

from fastapi import Request
from loguru import logger

from spade4.config.logging_config import log_request, log_response


class LoggingMiddleware:
    """
    Middleware para logging automático de requests y responses.

    Intercepta las requests HTTP y registra:
    - Método, URL e IP del cliente
    - Tiempo de procesamiento
    - Status code y tamaño del response
    """

    def __init__(self, app):
        self.app = app

    async def __call__(self, scope, receive, send):
        """
        Procesar una request HTTP con logging.

        Args:
            scope: Información del scope ASGI
            receive: Callable para recibir mensajes ASGI
            send: Callable para enviar mensajes ASGI
        """
        if scope["type"] != "http":
            await self.app(scope, receive, send)
            return

        request = Request(scope, receive)
        start_time = time.time()

        request_info = {
            "method": request.method,
            "url": str(request.url),
            "client_ip": request.client.host if request.client else None,
            "user_agent": request.headers.get("user-agent"),
        }
        log_request(request_info)

        response_size = 0
        response_status_code = 200

        async def send_wrapper(message):
            nonlocal response_size, response_status_code

            if message["type"] == "http.response.start":
                response_status_code = message["status"]
            elif message["type"] == "http.response.body":
                response_size += len(message.get("body", b""))

            await send(message)

        await self.app(scope, receive, send_wrapper)

        process_time = time.time() - start_time
        response_info = {
            "status_code": response_status_code,
            "process_time": round(process_time * 1000, 2),  # ms
            "response_size": response_size,
        }
        log_response(response_info, response_status_code)

        if response_status_code >= 500:
            log_level = "ERROR"
        elif response_status_code >= 400:
            log_level = "WARNING"
        else:
            log_level = "INFO"

        logger.log(
            log_level,
            f"{request.method} {request.url.path} - {response_status_code} "
            f"({process_time * 1000:.2f}ms)",
        )
