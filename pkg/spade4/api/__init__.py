"""
Configuración del router principal de la API.

Este módulo configura el router principal que agrupa todos los endpoints
bajo el prefijo /api/v1. Aquí se registran los sub-routers de cada módulo.

Para agregar nuevos endpoints:
1. Crear el archivo del router en spade4/api/
2. Importarlo aquí
3. Registrarlo con api_router.include_router()
"""
from fastapi import APIRouter

from spade4.api.forecasts.routes import router as forecasts_routes

api_router = APIRouter()

# Incluir los routers de los diferentes módulos
api_router.include_router(forecasts_routes, prefix="/forecasts", tags=["forecasts"])
