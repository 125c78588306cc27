# app/api/schemas.py
from datetime import datetime
from enum import Enum
from typing import Any, List, Optional
from uuid import UUID

from pydantic import BaseModel, ConfigDict, Field

from app.config import SolverConfig
from app.numerics.checks import SUITES


# =========================
# Enum под Run.status / Run.kind
# =========================
class RunStatus(str, Enum):
    queued = "queued"
    running = "running"
    done = "done"
    failed = "failed"


class RunKind(str, Enum):
    solve = "solve"
    verify = "verify"


# =========================
# Корни и условие разрешимости
# =========================
class RootSchema(BaseModel):
    re: float
    im: float
    branch: str
    residual: float


class RootsResponseSchema(BaseModel):
    roots: List[RootSchema]
    tau: float


class ConditionResponseSchema(BaseModel):
    ok: bool
    omega_mu: float
    tau: float
    message: str


# =========================
# Прогон (под БД)
# =========================
class RunSchema(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    id: UUID
    kind: RunKind
    status: RunStatus

    config: Optional[dict[str, Any]] = None
    rhs: Optional[str] = None
    report: Optional[dict[str, Any]] = None

    residual: Optional[float] = None
    iterations: Optional[int] = None
    exit_code: Optional[int] = None
    error_message: Optional[str] = None

    created_at: Optional[datetime] = None
    finished_at: Optional[datetime] = None


# =========================
# Запуск прогонов
# =========================
class SolveRequestSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: SolverConfig
    rhs: str = Field("builtin:one", description="builtin:<one|x|bump> или путь к CSV x,y,f на сервере")


class VerifyRequestSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    suite: str = Field("all", pattern=f"^({'|'.join(SUITES)})$")
    seed: int = 12345
    trials: int = Field(100, ge=1, le=10_000)


class EnqueueResponseSchema(BaseModel):
    status: str
    run_id: UUID
    task_id: Optional[str] = None

