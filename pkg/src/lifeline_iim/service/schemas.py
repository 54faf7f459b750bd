"""Request/response bodies for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class ScenarioRef(BaseModel):
    """Either a bundled-scenario name / file path, or an inline
    scenario document."""

    scenario: Optional[str] = None
    document: Optional[dict] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.scenario is None) == (self.document is None):
            raise ValueError("provide exactly one of 'scenario' or 'document'")
        return self


class ValidateRequest(ScenarioRef):
    pass


class ViolationItem(BaseModel):
    code: str
    where: str
    message: str


class ValidateResponse(BaseModel):
    ok: bool
    violations: list[ViolationItem] = Field(default_factory=list)


class RunRequest(ScenarioRef):
    dt: Optional[float] = Field(default=None, gt=0)
    autonomy_mode: Optional[Literal["expected", "dominant"]] = None
    classic: Optional[bool] = None


class RunResponse(BaseModel):
    scenario: str
    autonomy_mode: str
    report: dict
    checkpoints: dict = Field(default_factory=dict)


class ImportanceRequest(ScenarioRef):
    node: str
    target: str
    autonomy_mode: Optional[Literal["expected", "dominant"]] = None


class ImportanceResponse(BaseModel):
    node: str
    target: str
    times: list[float]
    importance: list[float]
    peak: float


class ComparePraRequest(ScenarioRef):
    tolerance: float = Field(default=1e-9, gt=0)


class ComparisonItem(BaseModel):
    model_config = {"extra": "allow"}

    kind: str
    id: str
    max_diff: Optional[float] = None
    match: bool


class ComparePraResponse(BaseModel):
    ok: bool
    comparisons: list[ComparisonItem]
    max_diff: float
    count: int


class ScenarioInfo(BaseModel):
    name: str
    origin: str


class ListScenariosResponse(BaseModel):
    scenarios: list[ScenarioInfo]


class HealthResponse(BaseModel):
    status: str
    version: str
