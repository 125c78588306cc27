# Точка входа воркера:
#   celery -A celery_worker worker --loglevel=info --concurrency=1
#   celery -A celery_worker beat --loglevel=info
from app.celery_app import celery_app
from app.logger import logger

logger.info(f"🚀 Celery worker: {celery_app.main}, задачи: {sorted(t for t in celery_app.tasks if not t.startswith('celery.'))}")

__all__ = ["celery_app"]
