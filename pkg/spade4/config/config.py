"""
Configuración de la aplicación SPADE4.

Este módulo contiene la configuración de proceso del toolkit: nombre y
versión, logging, directorio de resultados, paralelismo y CORS para la API.
La configuración de cada experimento vive en `spade4.config.experiment`.
"""

from typing import List

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Configuración principal de la aplicación.

    Utiliza Pydantic Settings para cargar configuración desde variables
    de entorno (prefijo ``SPADE4_``) y valores por defecto.

    Attributes:
        app_name: Nombre de la aplicación
        app_version: Versión del toolkit (se registra en cada manifest)
        debug: Modo debug activado/desactivado
        log_level: Nivel mínimo de la consola cuando debug está apagado
        log_dir: Directorio para los archivos de log rotativos
        log_to_file: Si se agregan sinks de archivo además de la consola
        output_dir: Directorio de salida por defecto de los comandos
        n_jobs: Workers de joblib para celdas, reinicios y grillas
        default_seed: Semilla maestra cuando la config no trae una
        allowed_origins: Lista de orígenes permitidos para CORS
    """

    model_config = SettingsConfigDict(
        env_prefix="SPADE4_", env_file=".env", extra="ignore"
    )

    # App
    app_name: str = "spade4"
    app_version: str = "0.1.0"
    debug: bool = False

    # Logging
    log_level: str = "INFO"
    log_dir: str = "logs"
    log_to_file: bool = False

    # Experimentos
    output_dir: str = "results"
    n_jobs: int = Field(default=1, ge=-1)
    default_seed: int = Field(default=0, ge=0)

    # CORS - string en lugar de lista para evitar problemas de parsing
    allowed_origins_str: str = "http://localhost:3000,http://localhost:8080"

    @field_validator("log_level")
    @classmethod
    def _upper_level(cls, value: str) -> str:
        return value.upper()

    @field_validator("n_jobs")
    @classmethod
    def _no_zero_workers(cls, value: int) -> int:
        if value == 0:
            raise ValueError("n_jobs must be a positive count or -1")
        return value

    @property
    def allowed_origins(self) -> List[str]:
        """Convierte el string de orígenes a lista."""
        if not self.allowed_origins_str.strip():
            return []
        return [
            origin.strip()
            for origin in self.allowed_origins_str.split(",")
            if origin.strip()
        ]


# Instancia global de configuración
settings = Settings()
