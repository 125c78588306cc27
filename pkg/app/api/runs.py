# app/api/runs.py

from typing import Optional
from uuid import UUID

from fastapi import APIRouter, Depends, HTTPException, Query
from fastapi.concurrency import run_in_threadpool
from sqlalchemy.ext.asyncio import AsyncSession
from sqlalchemy.future import select

from app.api.schemas import (
    ConditionResponseSchema,
    EnqueueResponseSchema,
    RootsResponseSchema,
    RunSchema,
    RunStatus,
    SolveRequestSchema,
    VerifyRequestSchema,
)
from app.celery_app import celery_app
from app.database import get_session
from app.logger import logger
from app.models import Run, RunKind
from app.models import RunStatus as DbRunStatus
from app.numerics.spectra import check_condition, find_roots

router = APIRouter(prefix="/api", tags=["runs"])

MAX_ROOTS = 200


# ======================================================
# Корни и порог τ
# ======================================================
@router.get("/roots", response_model=RootsResponseSchema, summary="Корни sinh z ± z = 0")
async def get_roots(count: int = Query(10, ge=1, le=MAX_ROOTS)):
    """
    Первые `count` корней по модулю и порог τ.

    **Пример запроса:**
    `/api/roots?count=5`
    """
    table = await run_in_threadpool(find_roots, count)
    return {"roots": table.to_records(), "tau": table.tau}


# ======================================================
# Проверка ωμ < τ
# ======================================================
@router.get("/check", response_model=ConditionResponseSchema, summary="Условие ωμ < τ")
async def get_check(
    omega: float = Query(..., gt=0, le=6.283185307179587),
    mu: float = Query(...),
):
    table = await run_in_threadpool(find_roots, 10)
    ok = check_condition(omega, mu, table)
    product = omega * mu
    message = (
        f"OK: ωμ = {product:.4f} < τ = {table.tau:.4f}" if ok
        else f"FAIL: ωμ ≥ τ (ωμ = {product:.4f}, τ = {table.tau:.4f})"
    )
    return {"ok": ok, "omega_mu": product, "tau": table.tau, "message": message}


# ======================================================
# Список прогонов
# ======================================================
@router.get("/runs", response_model=list[RunSchema], summary="Получить список прогонов")
async def get_runs(
    status: Optional[RunStatus] = Query(None, description="Фильтр по статусу"),
    page: int = Query(1, ge=1),
    size: int = Query(20, ge=1, le=100),
    session: AsyncSession = Depends(get_session),
):
    """
    Список прогонов, новые первыми: `/api/runs?status=done`
    """
    try:
        stmt = select(Run)
        if status:
            stmt = stmt.where(Run.status == DbRunStatus(status.value))
        stmt = stmt.order_by(Run.created_at.desc()).offset((page - 1) * size).limit(size)
        result = await session.execute(stmt)
        return result.scalars().all()
    except Exception:
        logger.exception("❌ Ошибка получения прогонов")
        raise HTTPException(500, "Не удалось получить прогоны")


@router.get("/runs/{run_id}", response_model=RunSchema, summary="Получить прогон по ID")
async def get_run(run_id: UUID, session: AsyncSession = Depends(get_session)):
    run = (await session.execute(select(Run).where(Run.id == str(run_id)))).scalar_one_or_none()
    if not run:
        raise HTTPException(404, "Прогон не найден")
    return run


# ======================================================
# Постановка в очередь
# ======================================================
async def _enqueue(session: AsyncSession, run: Run, task_name: str) -> dict:
    session.add(run)
    await session.commit()
    await session.refresh(run)
    try:
        task = celery_app.send_task(task_name, args=(run.id,))
    except Exception:
        logger.exception(f"❌ Не удалось поставить {task_name} в очередь")
        run.status = DbRunStatus.failed
        run.error_message = "broker unavailable"
        await session.commit()
        raise HTTPException(503, "Очередь задач недоступна")
    logger.info(f"🚀 {task_name} поставлен в очередь, run_id={run.id}, task_id={task.id}")
    return {"status": "queued", "run_id": run.id, "task_id": task.id}


@router.post("/runs/solve", response_model=EnqueueResponseSchema, status_code=202, summary="Запустить решение")
async def enqueue_solve(payload: SolveRequestSchema, session: AsyncSession = Depends(get_session)):
    """
    Решение по конфигурации и правой части в фоне.

    Пример:
    {
        "config": {"schema": 1, "omega": 1.5707963, "k": 0.1},
        "rhs": "builtin:bump"
    }
    """
    run = Run(
        kind=RunKind.solve,
        config=payload.config.model_dump(by_alias=True),
        rhs=payload.rhs,
    )
    return await _enqueue(session, run, "solve_run")


@router.post("/runs/verify", response_model=EnqueueResponseSchema, status_code=202, summary="Запустить проверки")
async def enqueue_verify(payload: VerifyRequestSchema, session: AsyncSession = Depends(get_session)):
    run = Run(kind=RunKind.verify, config=payload.model_dump())
    return await _enqueue(session, run, "verify_run")
