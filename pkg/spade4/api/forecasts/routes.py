"""
Endpoints de pronóstico.

Todas las rutas son síncronas: el trabajo es CPU y FastAPI las corre en su
threadpool. Los errores del toolkit se traducen a 422 en `spade4.main`.
"""

from fastapi import APIRouter
from loguru import logger

from spade4.config.logging_config import log_run_event
from spade4.models import NoiseSpec
from spade4.schemas.schemas import (
    ForecastRequest,
    ForecastResponse,
    IntervalRequest,
    IntervalResponse,
    RelativeErrorRequest,
    RelativeErrorResponse,
    SeriesOut,
    SimulateRequest,
)
from spade4.services.forecaster import fit, predict
from spade4.services.intervals import interval_forecast
from spade4.services.ode import simulate_observable
from spade4.services.timeseries import inject_noise, relative_error

router = APIRouter()


@router.post("/spade4", response_model=ForecastResponse, summary="Pronóstico SPADE4")
def forecast_spade4(request: ForecastRequest):
    """
    Ajustar SPADE4 sobre la serie recibida y pronosticar ``horizon`` días.

    Returns:
        ForecastResponse: días, valores, lambda elegido y soporte del modelo
    """
    model = fit(request.series.to_domain(), request.embedding.to_domain(), request.rfm.to_domain())
    result = predict(model, request.horizon)
    log_run_event("api_forecast", {"m": len(request.series.values), "horizon": request.horizon})
    return ForecastResponse(
        method=result.method,
        days=result.days.tolist(),
        values=result.values.tolist(),
        lam=model.coeffs.lam,
        nnz=model.coeffs.nnz,
    )


@router.post("/intervals", response_model=IntervalResponse, summary="Intervalo de predicción")
def forecast_interval(request: IntervalRequest):
    """Banda de 95% por backtesting desde ``m1`` hasta el largo de la serie."""
    series = request.series.to_domain()
    result = interval_forecast(
        series,
        request.m1,
        series.m,
        request.horizon,
        request.embedding.to_domain(),
        request.rfm.to_domain(),
        z=request.z,
    )
    return IntervalResponse(
        m1=request.m1,
        m2=series.m,
        days=result.point.days.tolist(),
        point=result.point.values.tolist(),
        lo95=result.lo.tolist(),
        hi95=result.hi.tolist(),
        sigma=result.sigma.tolist(),
    )


@router.post("/simulate", response_model=SeriesOut, summary="Serie sintética SμEIR")
def simulate(request: SimulateRequest):
    """Observable diaria normalizada, con ruido opcional."""
    series = simulate_observable(
        request.params(), request.initial(), request.horizon_days, request.target, request.step
    )
    if request.eta > 0:
        series = inject_noise(series, NoiseSpec(eta=request.eta, seed=request.noise_seed))
    logger.debug(f"Simulated {series.m} samples via API")
    return SeriesOut(t0=series.t0, dt=series.dt, values=series.values.tolist())


@router.post("/relative-error", response_model=RelativeErrorResponse, summary="Error relativo")
def compute_relative_error(request: RelativeErrorRequest):
    return RelativeErrorResponse(
        relative_error=relative_error(request.truth, request.predicted)
    )
