# app/database.py
from sqlalchemy import text
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.ext.asyncio import AsyncSession, create_async_engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import NullPool

from app.config import settings
from app.logger import logger
from app.models import Base

# Асинхронный движок SQLAlchemy (по умолчанию SQLite через aiosqlite).
# Задачи Celery поднимают свой event loop на каждый вызов (asyncio.run),
# поэтому соединения SQLite не переиспользуются между циклами.
engine = create_async_engine(
    settings.database_url,
    echo=settings.debug,
    future=True,
    **({"poolclass": NullPool} if settings.database_url.startswith("sqlite") else {}),
)

async_session = sessionmaker(
    bind=engine,
    class_=AsyncSession,
    expire_on_commit=False
)


# Dependency для FastAPI
async def get_session() -> AsyncSession:
    """
    Dependency для FastAPI: асинхронная сессия с откатом при ошибке.
    """
    async with async_session() as session:
        try:
            yield session
        except SQLAlchemyError:
            await session.rollback()
            raise


async def init_models() -> None:
    """Создаёт таблицы, если миграции ещё не применялись."""
    async with engine.begin() as conn:
        await conn.run_sync(Base.metadata.create_all)


async def test_connection() -> str:
    """
    Проверяет подключение к базе данных.
    """
    try:
        async with engine.connect() as conn:
            result = await conn.execute(text("SELECT 1"))
            value = result.scalar()
            logger.info(f"✅ Database connection OK: {value}")
            return "ok"
    except Exception as e:
        logger.exception(f"❌ Database connection failed: {e}")
        return "fail"
