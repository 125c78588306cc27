# app/numerics/serialization.py
"""
Файлы обмена: CSV для полей, контуров и выборок на секторе, JSON для
отчётов. Колонки описаны в README.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as ParamField, ValidationError
from scipy.interpolate import LinearNDInterpolator

from app.errors import IngestionError
from app.numerics.grids import Field, TGrid, ThetaGrid, XFunction, make_t_grid, make_theta_grid
from app.numerics.pipeline import SectorFunction, SectorSamples
from app.numerics.sum_inverter import Contour

FIELD_COLUMNS = ("t", "theta", "psi1_re", "psi1_im", "psi2_re", "psi2_im")
THETA_COLUMNS = ("theta", "psi1_re", "psi1_im", "psi2_re", "psi2_im")
SECTOR_COLUMNS = ("r", "theta", "u", "masked")
CONTOUR_COLUMNS = ("node", "re", "im", "w_re", "w_im")
RHS_COLUMNS = ("x", "y", "f")
NODE_TOL = 1e-9


def to_jsonable(obj: Any):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj


def dumps_report(payload: dict) -> str:
    """Детерминированная сериализация: ключи отсортированы."""
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2, ensure_ascii=False)


def write_report(path: str | Path, payload: dict) -> None:
    Path(path).write_text(dumps_report(payload) + "\n", encoding="utf-8")


# =========================
# Поля
# =========================
class FieldMeta(BaseModel):
    """Сопроводительный JSON к CSV поля: по нему сетки восстанавливаются без конфигурации."""
    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = ParamField(1, alias="schema")
    n_theta: int = ParamField(..., ge=2)
    n_t: int = ParamField(..., ge=2)
    t_max: float = ParamField(..., gt=0)
    omega: float = ParamField(..., gt=0)
    mu: Optional[float] = None
    grading: Literal["uniform", "exponential"]
    gamma: float = ParamField(2.0, gt=0)

    @classmethod
    def of(cls, V: Field, mu: float | None = None) -> "FieldMeta":
        return cls(
            schema=1,
            n_theta=V.theta_grid.n,
            n_t=V.t_grid.n,
            t_max=V.t_grid.t_max,
            omega=V.theta_grid.omega,
            mu=mu,
            grading=V.t_grid.grading,
            gamma=V.t_grid.gamma,
        )

    def grids(self) -> tuple[ThetaGrid, TGrid]:
        return (
            make_theta_grid(self.omega, self.n_theta),
            make_t_grid(self.t_max, self.n_t, self.grading, gamma=self.gamma),
        )


def meta_path(path: str | Path) -> Path:
    """V.csv → V.csv.json"""
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_field_csv(path: str | Path, V: Field, mu: float | None = None) -> None:
    tt, th = np.meshgrid(V.t_grid.nodes, V.theta_grid.nodes, indexing="ij")
    table = np.column_stack([
        tt.ravel(), th.ravel(),
        V.psi1.real.ravel(), V.psi1.imag.ravel(),
        V.psi2.real.ravel(), V.psi2.imag.ravel(),
    ])
    np.savetxt(path, table, delimiter=",", header=",".join(FIELD_COLUMNS), comments="", fmt="%.17g")
    meta = FieldMeta.of(V, mu).model_dump(by_alias=True)
    meta_path(path).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")


def read_field_meta(path: str | Path) -> FieldMeta:
    sidecar = meta_path(path)
    try:
        return FieldMeta.model_validate_json(sidecar.read_text(encoding="utf-8"))
    except OSError as e:
        raise IngestionError(f"cannot read grid metadata {sidecar}: {e}") from e
    except ValidationError as e:
        raise IngestionError(f"invalid grid metadata in {sidecar}", errors=e.errors(include_url=False)) from e


def _load_table(path: str | Path, columns: tuple[str, ...]) -> np.ndarray:
    try:
        data = np.genfromtxt(path, delimiter=",", names=True, dtype=float)
    except (OSError, ValueError) as e:
        raise IngestionError(f"cannot read {path}: {e}") from e
    names = data.dtype.names or ()
    missing = [c for c in columns if c not in names]
    if missing:
        raise IngestionError(f"{path} lacks columns {missing}", expected=list(columns))
    return np.atleast_1d(data)


def read_field_csv(path: str | Path, theta_grid: ThetaGrid | None = None, t_grid: TGrid | None = None) -> Field:
    """
    Поле на заданных сетках; узлы файла должны совпадать с ними. Без сеток
    они строятся по сопроводительному JSON (`meta_path`).
    """
    if theta_grid is None or t_grid is None:
        theta_grid, t_grid = read_field_meta(path).grids()
    data = _load_table(path, FIELD_COLUMNS)
    shape = (t_grid.n, theta_grid.n)
    if data.size != shape[0] * shape[1]:
        raise IngestionError(f"{path} has {data.size} rows, expected {shape[0] * shape[1]}")
    tt, th = np.meshgrid(t_grid.nodes, theta_grid.nodes, indexing="ij")
    if (np.max(np.abs(data["t"] - tt.ravel())) > NODE_TOL
            or np.max(np.abs(data["theta"] - th.ravel())) > NODE_TOL):
        raise IngestionError(f"{path} is sampled on a different grid")
    psi1 = (data["psi1_re"] + 1j * data["psi1_im"]).reshape(shape)
    psi2 = (data["psi2_re"] + 1j * data["psi2_im"]).reshape(shape)
    if not (np.all(np.isfinite(psi1)) and np.all(np.isfinite(psi2))):
        raise IngestionError(f"{path} contains non-finite values")
    return Field(theta_grid, t_grid, psi1, psi2)


# =========================
# Функции θ
# =========================
def write_theta_csv(path: str | Path, w: XFunction, grid: ThetaGrid) -> None:
    table = np.column_stack([grid.nodes, w.psi1.real, w.psi1.imag, w.psi2.real, w.psi2.imag])
    np.savetxt(path, table, delimiter=",", header=",".join(THETA_COLUMNS), comments="", fmt="%.17g")


def read_theta_csv(path: str | Path, grid: ThetaGrid) -> XFunction:
    """Пара (ψ₁, ψ₂) в узлах θ сетки; формат тот же, что у write_theta_csv."""
    data = _load_table(path, THETA_COLUMNS)
    if data.size != grid.n:
        raise IngestionError(f"{path} has {data.size} rows, expected {grid.n}")
    if np.max(np.abs(data["theta"] - grid.nodes)) > NODE_TOL:
        raise IngestionError(f"{path} is sampled on a different theta grid")
    psi1 = data["psi1_re"] + 1j * data["psi1_im"]
    psi2 = data["psi2_re"] + 1j * data["psi2_im"]
    if not (np.all(np.isfinite(psi1)) and np.all(np.isfinite(psi2))):
        raise IngestionError(f"{path} contains non-finite values")
    return XFunction(psi1, psi2)


# =========================
# Сектор и контур
# =========================
def write_sector_csv(path: str | Path, samples: SectorSamples) -> None:
    rows = np.array(list(samples.rows()), dtype=float).reshape(-1, len(SECTOR_COLUMNS))
    np.savetxt(path, rows, delimiter=",", header=",".join(SECTOR_COLUMNS), comments="", fmt="%.17g")


def write_contour_csv(path: str | Path, contour: Contour) -> None:
    z, w = contour.quad_nodes, contour.quad_weights
    table = np.column_stack([np.arange(z.size), z.real, z.imag, w.real, w.imag])
    np.savetxt(path, table, delimiter=",", header=",".join(CONTOUR_COLUMNS), comments="", fmt="%.17g")


def read_rhs_csv(path: str | Path) -> SectorFunction:
    """f по разрозненным точкам (x, y, f); вне выпуклой оболочки — NaN."""
    data = _load_table(path, RHS_COLUMNS)
    if data.size < 3:
        raise IngestionError(f"{path} needs at least 3 sample points")
    interp = LinearNDInterpolator(np.column_stack([data["x"], data["y"]]), data["f"])

    def f(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return interp(x, y)

    return f
