# app/models.py
import enum
import uuid

from sqlalchemy import (
    JSON,
    Column,
    DateTime,
    Enum,
    Float,
    Integer,
    String,
    Text,
    func,
)
from sqlalchemy.orm import declarative_base

Base = declarative_base()


# =========================
# Enum для статусов прогона
# =========================
class RunStatus(str, enum.Enum):
    queued = "queued"
    running = "running"
    done = "done"
    failed = "failed"


class RunKind(str, enum.Enum):
    solve = "solve"
    verify = "verify"


# =========================
# Прогоны решателя
# =========================
class Run(Base):
    __tablename__ = "runs"

    id = Column(String, primary_key=True, default=lambda: str(uuid.uuid4()))
    kind = Column(Enum(RunKind, name="run_kind_enum"), nullable=False, index=True)

    status = Column(
        Enum(RunStatus, name="run_status_enum"),
        default=RunStatus.queued,
        nullable=False,
        index=True,
    )

    config = Column(JSON, nullable=True)   # SolverConfig или параметры verify
    rhs = Column(String, nullable=True)    # builtin:<name> или путь к CSV
    report = Column(JSON, nullable=True)

    residual = Column(Float, nullable=True)
    iterations = Column(Integer, nullable=True)

    exit_code = Column(Integer, nullable=True)
    error_message = Column(Text, nullable=True)

    created_at = Column(DateTime, server_default=func.now())
    finished_at = Column(DateTime, nullable=True)

    def __repr__(self):
        return f"<Run(kind={self.kind}, status={self.status})>"
