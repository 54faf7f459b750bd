"""FastAPI service exposing the scenario operations.

Run with:  uvicorn lifeline_iim.service.app:app
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import LifelineError, ScenarioParseError
from . import ops
from .schemas import (
    ComparePraRequest,
    ComparePraResponse,
    HealthResponse,
    ImportanceRequest,
    ImportanceResponse,
    ListScenariosResponse,
    RunRequest,
    RunResponse,
    ScenarioRef,
    ValidateRequest,
    ValidateResponse,
)

app = FastAPI(
    title="lifeline-iim",
    version=__version__,
    description=(
        "Probabilistic cascading-failure analysis for interdependent "
        "lifeline networks."
    ),
)


def _document(ref: ScenarioRef):
    try:
        return ops.load_document(ref.scenario, ref.document)
    except ScenarioParseError as e:
        unknown = any("unknown scenario" in err["message"] for err in e.errors)
        raise HTTPException(status_code=404 if unknown else 422, detail=e.errors)


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.get("/scenarios", response_model=ListScenariosResponse)
def scenarios() -> dict:
    return ops.op_list_scenarios()


@app.post("/validate", response_model=ValidateResponse)
def validate(req: ValidateRequest) -> dict:
    return ops.op_validate(_document(req))


@app.post("/run", response_model=RunResponse)
def run(req: RunRequest) -> dict:
    doc = _document(req)
    try:
        return ops.op_run(doc, dt=req.dt, autonomy_mode=req.autonomy_mode, classic=req.classic)
    except LifelineError as e:
        raise HTTPException(status_code=422, detail=str(e))


@app.post("/importance", response_model=ImportanceResponse)
def importance(req: ImportanceRequest) -> dict:
    doc = _document(req)
    try:
        return ops.op_importance(doc, req.node, req.target, autonomy_mode=req.autonomy_mode)
    except KeyError as e:
        raise HTTPException(status_code=404, detail=str(e))
    except LifelineError as e:
        raise HTTPException(status_code=422, detail=str(e))


@app.post("/compare-pra", response_model=ComparePraResponse)
def compare_pra(req: ComparePraRequest) -> dict:
    doc = _document(req)
    try:
        return ops.op_compare_pra(doc, tol=req.tolerance)
    except LifelineError as e:
        raise HTTPException(status_code=422, detail=str(e))
