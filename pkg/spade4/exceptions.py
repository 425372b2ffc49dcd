"""
Jerarquía de errores del toolkit.

Todas las excepciones propias derivan de `Spade4Error`; las de validación
de datos también derivan de `ValueError` para que el código cliente que ya
captura ValueError siga funcionando. La CLI las traduce a un diagnóstico de
una línea y la API HTTP a un status 422.
"""

from typing import Optional


class Spade4Error(Exception):
    """Raíz de todos los errores del toolkit."""


class DataValidationError(Spade4Error, ValueError):
    """
    Error de validación de una serie o de un archivo de entrada.

    Attributes:
        line: Línea del archivo (1-based, contando el header) que lo causó
    """

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MissingFileError(DataValidationError):
    """El archivo de entrada no existe."""


class MalformedRowError(DataValidationError):
    """Fila con una cantidad de campos distinta de dos, o header inválido."""


class NonUniformStepError(DataValidationError):
    """La columna de días no avanza con paso constante."""


class NonNumericValueError(DataValidationError):
    """Un día o un valor no se pudo interpretar como número."""


class EmptySeriesError(DataValidationError):
    """La serie no tiene observaciones."""


class InvalidSamplingError(DataValidationError):
    """La operación exige un muestreo que la serie no tiene (p. ej. dt = 1 día)."""


class WindowError(DataValidationError):
    """Ventana de días fuera del rango de la serie o invertida."""


class InsufficientDataError(Spade4Error, ValueError):
    """No hay suficientes muestras para la operación pedida."""


class DimensionMismatchError(Spade4Error, ValueError):
    """Dimensiones incompatibles entre vectores de retardo y la base."""


class NonFiniteInputError(Spade4Error, ValueError):
    """Entradas con NaN o infinitos."""


class DomainError(Spade4Error, ValueError):
    """Argumento fuera del dominio de definición."""


class ZeroDenominatorError(Spade4Error, ZeroDivisionError):
    """La verdad de referencia es idénticamente cero."""


class DivergenceError(Spade4Error, ArithmeticError):
    """
    Integración o pronóstico con valores no finitos.

    Attributes:
        t: Tiempo (días) en que se detectó la divergencia, si aplica
        step: Paso del pronóstico (1-based) en que se detectó, si aplica
    """

    def __init__(
        self, message: str, t: Optional[float] = None, step: Optional[int] = None
    ):
        self.t = t
        self.step = step
        super().__init__(message)


class FitFailureError(Spade4Error, RuntimeError):
    """Todos los reinicios de un ajuste divergieron."""


class ConfigError(Spade4Error, ValueError):
    """Config de experimento ilegible, con claves desconocidas o valores inválidos."""
