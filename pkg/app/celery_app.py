# app/celery_app.py
from celery import Celery
from celery.schedules import crontab
from app.config import settings

# ================================
# Инициализация Celery
# ================================
celery_app = Celery(
    "sector_solver",
    broker=settings.celery_broker_url,
    backend=settings.celery_result_backend,
)

# ================================
# Конфигурация Celery
# ================================
celery_app.conf.update(
    task_track_started=True,
    task_serializer="json",
    result_serializer="json",
    accept_content=["json"],
    worker_prefetch_multiplier=1,  # прогоны долгие, берём по одному
)

celery_app.conf.timezone = "Europe/Moscow"
celery_app.conf.enable_utc = False

# ================================
# Расписание Celery Beat
# ================================
celery_app.conf.beat_schedule = {
    # Полный набор проверок каждую ночь в 02:30
    "nightly-verify": {
        "task": "nightly_verify",
        "schedule": crontab(hour=2, minute=30),
    },
}

# ================================
# Импорт всех задач
# ================================
import app.tasks.solver_tasks  # noqa: E402,F401
