# app/routers/scenarios.py
from typing import Any, Dict, List, Optional

from fastapi import APIRouter, HTTPException, Request
from fastapi.concurrency import run_in_threadpool
from loguru import logger
from pydantic import BaseModel, Field

from app.auth.rate_limit import limiter
from app.config import settings
from app.errors import ConfigError, ScenarioFailure
from app.lab.registry import scenario_registry
from app.lab.report import round_floats
from app.lab.runner import run_scenario
from app.lab.verify import IdentityResult, run_identity_suite

router = APIRouter(prefix="/scenarios", tags=["Scenarios"])


# ======================
# Models
# ======================
class ScenarioInfo(BaseModel):
    name: str
    source: str
    description: str
    config: Dict[str, Any]


class VerifyRequest(BaseModel):
    seeds: int = Field(default=10, ge=1, le=1000, description="Semillas aleatorias por identidad")


class VerifyResponse(BaseModel):
    passed: bool
    identities: List[IdentityResult]


class RunRequest(BaseModel):
    scenario: str = Field(..., description="Nombre de un escenario registrado")
    overrides: Dict[str, Any] = Field(default_factory=dict, description="Claves de ScenarioConfig a sobrescribir")
    workers: Optional[int] = Field(default=None, description="Workers de joblib")
    write: bool = Field(default=True, description="Escribir artefactos en disco")


# ======================
# Endpoints
# ======================
@router.get("/", response_model=List[ScenarioInfo])
async def list_scenarios():
    """Escenarios registrados con su configuración por defecto."""
    return scenario_registry.describe()


@router.post("/verify", response_model=VerifyResponse)
async def verify_identities(data: VerifyRequest):
    """Suite de identidades algebraicas exactas (sin Monte Carlo)."""
    try:
        results = await run_in_threadpool(run_identity_suite, data.seeds)
    except Exception as e:
        logger.error(f"❌ Error en la verificación: {type(e).__name__}: {e}")
        raise HTTPException(status_code=500, detail=f"Error en la verificación: {str(e)}")
    return VerifyResponse(passed=all(r.passed for r in results), identities=results)


@router.post("/run")
@limiter.limit(settings.rate_limit_run)
async def run(request: Request, data: RunRequest):
    """
    Ejecuta un escenario y devuelve el reporte de convergencia.

    - 422: configuración inválida (mensajes por campo)
    - 409: criterio de aceptación fallido (incluye el reporte)
    """
    try:
        config = scenario_registry.resolve(data.scenario, data.overrides)
    except ConfigError as e:
        raise HTTPException(
            status_code=422,
            detail=[{"field": field, "message": message} for field, message in e.errors],
        )

    try:
        report = await run_in_threadpool(run_scenario, config, data.workers, data.write)
    except ScenarioFailure as e:
        detail: Dict[str, Any] = {"message": f"Escenario fallido: {e}"}
        if e.report is not None:
            detail["report"] = round_floats(e.report.model_dump(mode="json"))
        raise HTTPException(status_code=409, detail=detail)
    except Exception as e:
        logger.error(f"❌ Error ejecutando '{data.scenario}': {type(e).__name__}: {e}")
        raise HTTPException(status_code=500, detail=f"Error ejecutando el escenario: {str(e)}")

    return round_floats(report.model_dump(mode="json"))
