# app/tasks/solver_tasks.py

import asyncio
from datetime import datetime

from sqlalchemy import select

from app.celery_app import celery_app
from app.config import SolverConfig, settings
from app.database import async_session
from app.errors import SolverError
from app.logger import logger
from app.models import Run, RunKind, RunStatus
from app.numerics.serialization import to_jsonable
from app.runner import solve_sector, verify

NIGHTLY_SEED = 12345
NIGHTLY_TRIALS = 100


async def _load(session, run_id: str) -> Run | None:
    run = (await session.execute(select(Run).where(Run.id == run_id))).scalar_one_or_none()
    if run is None:
        logger.warning(f"🟡 Прогон {run_id} не найден")
    return run


def _fail(run: Run, exc: Exception, exit_code: int) -> None:
    run.status = RunStatus.failed
    run.exit_code = exit_code
    run.error_message = f"{type(exc).__name__}: {exc}"
    if isinstance(exc, SolverError):
        run.report = to_jsonable(exc.to_dict())
    run.finished_at = datetime.utcnow()


# =========================
# Решение на секторе
# =========================
@celery_app.task(name="solve_run")
def solve_run(run_id: str):
    async def _main():
        async with async_session() as session:
            run = await _load(session, run_id)
            if run is None:
                return None
            run.status = RunStatus.running
            await session.commit()

            try:
                config = SolverConfig.from_dict(run.config or {})
                outcome = solve_sector(config, run.rhs or "builtin:one", settings.solver_workers)
            except SolverError as e:
                logger.warning(f"⚠️ Прогон {run_id} завершился ошибкой: {e}")
                _fail(run, e, e.exit_code)
            except Exception as e:
                logger.exception(f"❌ Непредвиденная ошибка в прогоне {run_id}")
                _fail(run, e, 1)
            else:
                run.status = RunStatus.done
                run.report = to_jsonable(outcome.report)
                run.residual = outcome.report["residual"]
                run.iterations = outcome.result.iterations
                run.exit_code = 0
                run.finished_at = datetime.utcnow()
                logger.info(f"✅ Прогон {run_id} готов, невязка {run.residual:.3e}")

            await session.commit()
            return run.status.value

    return asyncio.run(_main())


# =========================
# Проверки оценок
# =========================
@celery_app.task(name="verify_run")
def verify_run(run_id: str):
    async def _main():
        async with async_session() as session:
            run = await _load(session, run_id)
            if run is None:
                return None
            run.status = RunStatus.running
            await session.commit()

            opts = run.config or {}
            try:
                report = verify(
                    opts.get("suite", "all"),
                    opts.get("seed", NIGHTLY_SEED),
                    opts.get("trials", NIGHTLY_TRIALS),
                    settings.solver_workers,
                )
            except SolverError as e:
                _fail(run, e, e.exit_code)
            except Exception as e:
                logger.exception(f"❌ Непредвиденная ошибка в проверке {run_id}")
                _fail(run, e, 1)
            else:
                run.report = to_jsonable(report)
                run.status = RunStatus.done
                run.exit_code = 0 if report["passed"] else 2
                run.finished_at = datetime.utcnow()

            await session.commit()
            return run.status.value

    return asyncio.run(_main())


# =========================
# Ночная проверка
# =========================
@celery_app.task(name="nightly_verify")
def nightly_verify():
    async def _main():
        async with async_session() as session:
            run = Run(
                kind=RunKind.verify,
                config={"suite": "all", "seed": NIGHTLY_SEED, "trials": NIGHTLY_TRIALS},
            )
            session.add(run)
            await session.commit()
            return run.id

    run_id = asyncio.run(_main())
    logger.info(f"🌙 Ночная проверка, run_id={run_id}")
    return verify_run(run_id)
