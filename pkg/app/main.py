# app/main.py

import redis.asyncio as redis
from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from sqlalchemy import func, select
from starlette.requests import Request
from starlette.status import HTTP_422_UNPROCESSABLE_ENTITY, HTTP_500_INTERNAL_SERVER_ERROR

from app.api.runs import router as runs_router
from app.celery_app import celery_app
from app.config import APP_META, settings
from app.database import async_session, init_models, test_connection
from app.errors import SolverError
from app.logger import logger
from app.models import Run
from app.numerics.serialization import to_jsonable

# =====================================================
# Инициализация FastAPI
# =====================================================
app = FastAPI(
    title=APP_META.name,
    description=APP_META.description,
    version=APP_META.version,
    contact=APP_META.contact.model_dump(),
    openapi_tags=[
        {"name": "runs", "description": "Корни, условие ωμ < τ, прогоны решателя и проверок"},
        {"name": "main", "description": "Здоровье сервиса и очередь прогонов"},
    ],
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],  # ограничить список доменов для продакшена
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)

app.include_router(runs_router)


@app.get("/", tags=["main"], summary="Главная страница API")
async def root():
    return {"message": "📐 Решатель Δ²u − kΔu = f в секторе", "version": APP_META.version}


# =====================================================
# Health-check
# =====================================================
async def _ping_redis() -> str:
    if not settings.redis_url:
        return "not configured"
    client = redis.from_url(settings.redis_url)
    try:
        return "ok" if await client.ping() else "fail"
    finally:
        await client.aclose()


def _celery_workers() -> list[str] | str:
    if not settings.celery_broker_url:
        return "not configured"
    stats = celery_app.control.inspect(timeout=2).stats() or {}
    return sorted(stats)


async def _run_counts() -> dict[str, int]:
    """Число прогонов по статусам."""
    async with async_session() as session:
        rows = await session.execute(select(Run.status, func.count()).group_by(Run.status))
        return {getattr(status, "value", status): count for status, count in rows.all()}


@app.get("/health", tags=["main"], summary="Проверка состояния системы")
async def health():
    """
    - `database` — подключение к базе прогонов
    - `redis`, `celery` — брокер и воркеры (если настроены)
    - `runs` — сколько прогонов в каждом статусе
    - `solver_workers` — потоков на один прогон
    """
    report = {"status": "ok", "database": await test_connection(), "solver_workers": settings.solver_workers}
    for name, ping in (("redis", _ping_redis), ("celery", None)):
        try:
            report[name] = await ping() if ping else _celery_workers()
        except Exception as e:
            logger.warning(f"⚠️ {name} недоступен: {e}")
            report[name] = f"fail: {e}"

    try:
        report["runs"] = await _run_counts()
    except Exception as e:
        logger.exception("❌ Не удалось прочитать таблицу прогонов")
        return JSONResponse(status_code=HTTP_500_INTERNAL_SERVER_ERROR, content={"status": "error", "detail": str(e)})

    if report["database"] != "ok":
        report["status"] = "degraded"
    return report


# =====================================================
# Обработка ошибок
# =====================================================
@app.exception_handler(RequestValidationError)
async def validation_exception_handler(request: Request, exc: RequestValidationError):
    logger.warning(f"❌ Validation error: {exc.errors()}")
    return JSONResponse(
        status_code=HTTP_422_UNPROCESSABLE_ENTITY,
        content={"status": "fail", "detail": exc.errors(), "body": exc.body},
    )


@app.exception_handler(SolverError)
async def solver_exception_handler(request: Request, exc: SolverError):
    logger.warning(f"⚠️ {type(exc).__name__}: {exc}")
    return JSONResponse(
        status_code=HTTP_422_UNPROCESSABLE_ENTITY,
        content=to_jsonable({"status": "fail", **exc.to_dict()}),
    )


@app.on_event("startup")
async def startup_event():
    settings.log_config()
    await init_models()
    logger.info("🚀 Приложение запущено")
