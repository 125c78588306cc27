# app/config.py
import json
import os
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.errors import ConfigurationError

BASE_DIR = Path(__file__).resolve().parents[1]  # корень проекта

CONFIG_SCHEMA_VERSION = 1


class Contact(BaseModel):
    name: str
    email: str
    url: str


class AppMeta(BaseModel):
    name: str
    description: str
    version: str
    contact: Contact


APP_META = AppMeta(
    name="Sector solver",
    description=(
        "Полуаналитический решатель уравнения Δ²u − kΔu = f в секторе: "
        "явные резольвенты, контурное обращение суммы операторов, "
        "ряд Неймана и численная проверка всех оценок."
    ),
    version="0.1.0",
    contact=Contact(
        name="MrJonson",
        email="flashh@list.ru",
        url="https://github.com/mrjonson75",
    ),
)


class Settings(BaseSettings):
    """
    Настройки окружения, загружаемые из переменных окружения и .env файла.
    Численные параметры живут в SolverConfig; из окружения берётся
    только число воркеров.
    """
    model_config = SettingsConfigDict(
        env_file=str(BASE_DIR / ".env"),
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Общие
    debug: bool = Field(False, alias="DEBUG")

    # Параллелизм квадратуры
    solver_workers: int = Field(default_factory=lambda: os.cpu_count() or 1, alias="SOLVER_WORKERS", ge=1)

    # Хранилище прогонов
    database_url: str = Field("sqlite+aiosqlite:///./solver.db", alias="DATABASE_URL")

    # Очередь
    redis_url: Optional[str] = Field(None, alias="REDIS_URL")
    celery_broker_url: Optional[str] = Field(None, alias="CELERY_BROKER_URL")
    celery_result_backend: Optional[str] = Field(None, alias="CELERY_RESULT_BACKEND")

    def log_config(self):
        """Логируем конфигурацию"""
        from app.logger import logger

        logger.info("⚙️ App configuration:")
        logger.info(f"DEBUG: {self.debug}")
        logger.info(f"Workers: {self.solver_workers}")
        logger.info(f"Database: {self.database_url}")

        if self.celery_broker_url:
            logger.info(f"Celery Broker: {self.celery_broker_url}")


settings = Settings()


# =========================
# Конфигурация решателя (JSON)
# =========================
class ToleranceConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    quad_tol: float = Field(1e-10, gt=0)
    newton_tol: float = Field(1e-12, gt=0)
    neumann_tol: float = Field(1e-8, gt=0)
    residual_tol: float = Field(1e-6, gt=0)


class GridConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_theta: int = Field(32, ge=8)
    n_t: int = Field(48, ge=8)
    t_max: float = Field(16.0, gt=0)
    grading: Literal["uniform", "exponential"] = "exponential"


class ContourConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    nodes_per_branch: int = Field(96, ge=2)
    z_max: float = Field(1e8, gt=0)
    eps_l1: float = Field(0.1, gt=0)
    eps_l2: float = Field(0.3, gt=0)
    eps0: Optional[float] = Field(None, gt=0)
    theta0: Optional[float] = Field(None, gt=0)


class SolverConfig(BaseModel):
    """
    Содержимое `--config cfg.json`. Поле `schema` обязательно и равно 1.
    """
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: Literal[1] = Field(..., alias="schema")

    omega: float = Field(..., gt=0)
    mu: Optional[float] = None
    p: float = Field(2.0, gt=1)
    k: float = Field(0.0, ge=0)
    rho: float = Field(1.0, gt=0)

    tolerances: ToleranceConfig = ToleranceConfig()
    grid: GridConfig = GridConfig()
    contour: ContourConfig = ContourConfig()

    theta_method: Literal["auto", "explicit", "collocation"] = "auto"
    t_method: Literal["collocation", "formula"] = "collocation"
    root_count: int = Field(10, ge=1)
    seed: int = 12345
    max_iterations: int = Field(50, ge=1)
    rho0_power_steps: int = Field(2, ge=0)

    @field_validator("omega")
    @classmethod
    def _omega_in_range(cls, value: float) -> float:
        if value > 2 * 3.141592653589793 + 1e-15:
            raise ValueError("omega must lie in (0, 2π]")
        return value

    @property
    def effective_mu(self) -> float:
        """По умолчанию μ = ν = 3 − 2/p"""
        return self.mu if self.mu is not None else 3.0 - 2.0 / self.p

    @classmethod
    def from_file(cls, path: str | Path) -> "SolverConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"cannot read config {path}: {e}") from e
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "SolverConfig":
        try:
            return cls.model_validate(raw)
        except ValidationError as e:
            raise ConfigurationError(f"invalid config: {e.errors(include_url=False)}") from e
