# app/numerics/grids.py
"""
Сетки, дифференцирование, дискретные нормы и ядро-свёртка.

θ-сетка: узлы Чебышёва–Гаусса–Лобатто на [0, ω] с весами Кленшоу–Кёртиса.
t-сетка: те же узлы, отображённые на [0, t_max] (аффинно или с экспоненциальным
сгущением к t = 0). Дифференцирование спектральное, через матрицы.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Union

import numpy as np
import scipy.linalg as scl
from pydantic import BaseModel, ConfigDict
from pydantic import Field as ParamField

from app.errors import ConfigurationError, DomainError, TruncationError

TWO_PI = 2.0 * math.pi
MIN_NODES = 8


# =========================
# Параметры задачи
# =========================
class Tolerances(BaseModel):
    model_config = ConfigDict(frozen=True)

    quad_tol: float = ParamField(1e-10, gt=0)
    newton_tol: float = ParamField(1e-12, gt=0)
    neumann_tol: float = ParamField(1e-8, gt=0)
    residual_tol: float = ParamField(1e-6, gt=0)


class Params(BaseModel):
    """Физические параметры (ω, μ, p, k, ρ) и допуски одного расчёта."""
    model_config = ConfigDict(frozen=True)

    omega: float = ParamField(..., gt=0, le=TWO_PI)
    mu: float = 0.0
    p: float = ParamField(2.0, gt=1)
    k: float = ParamField(0.0, ge=0)
    rho: float = ParamField(1.0, gt=0)
    tolerances: Tolerances = Tolerances()

    @property
    def nu(self) -> float:
        return 3.0 - 2.0 / self.p


# =========================
# Чебышёвские примитивы
# =========================
def _cheb_nodes(n: int) -> np.ndarray:
    """Узлы Лобатто на [-1, 1] по возрастанию."""
    return -np.cos(np.pi * np.arange(n) / (n - 1))


def _cheb_matrix(x: np.ndarray) -> np.ndarray:
    """Матрица первой производной на узлах Лобатто (любой порядок узлов)."""
    n = x.size
    c = np.ones(n)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(n)
    dx = x[:, None] - x[None, :]
    d = np.outer(c, 1.0 / c) / (dx + np.eye(n))
    # диагональ через сумму строк: точнее формулы в закрытом виде
    d -= np.diag(d.sum(axis=1))
    return d


def _clenshaw_curtis_weights(n: int) -> np.ndarray:
    """Веса Кленшоу–Кёртиса на [-1, 1] для узлов _cheb_nodes(n)."""
    theta = np.pi * np.arange(n) / (n - 1)
    half = (n - 1) // 2
    b = 2.0 * np.ones(half)
    if 2 * half + 1 == n:
        b[half - 1] = 1.0
    j = np.arange(1, half + 1)
    b /= 4.0 * j * j - 1.0
    w = 2.0 * (1.0 - b @ np.cos(np.outer(2 * j, theta))) / (n - 1)
    w[0] /= 2.0
    w[-1] /= 2.0
    # симметрия: узлы -cos(theta) дают тот же набор весов
    return w


class _SpectralGrid:
    nodes: np.ndarray
    weights: np.ndarray
    d1: np.ndarray

    @property
    def n(self) -> int:
        return int(self.nodes.size)

    @cached_property
    def _powers(self) -> dict[int, np.ndarray]:
        powers = {1: self.d1}
        for order in range(2, 5):
            powers[order] = powers[order - 1] @ self.d1
        return powers

    def diff_matrix(self, order: int) -> np.ndarray:
        if order not in (1, 2, 3, 4):
            raise ConfigurationError(f"derivative order must be 1..4, got {order}")
        return self._powers[order]

    def integrate(self, values: np.ndarray, axis: int = 0) -> np.ndarray:
        return np.tensordot(self.weights, values, axes=([0], [axis]))


@dataclass(frozen=True, eq=False)
class ThetaGrid(_SpectralGrid):
    omega: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    d1: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class TGrid(_SpectralGrid):
    t_max: float
    grading: str
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    d1: np.ndarray = field(repr=False)
    gamma: float = 2.0

    def xi_of(self, t: np.ndarray) -> np.ndarray:
        """Обратное отображение t ↦ ξ ∈ [0, 1]; узлы сетки — чебышёвские по ξ."""
        t = np.asarray(t, dtype=float)
        if self.grading == "uniform":
            return t / self.t_max
        return np.log1p(t * math.expm1(self.gamma) / self.t_max) / self.gamma

    @cached_property
    def xi_nodes(self) -> np.ndarray:
        return (_cheb_nodes(self.n) + 1.0) / 2.0


Grid = Union[ThetaGrid, TGrid]


def make_theta_grid(omega: float, n: int) -> ThetaGrid:
    """Сетка на [0, ω] со сгущением к обоим концам."""
    if n < MIN_NODES:
        raise ConfigurationError(f"theta grid needs n >= {MIN_NODES}, got {n}")
    if not (0.0 < omega <= TWO_PI + 1e-15):
        raise ConfigurationError(f"omega must lie in (0, 2π], got {omega}")

    x = _cheb_nodes(n)
    scale = omega / 2.0
    nodes = scale * (x + 1.0)
    nodes[0], nodes[-1] = 0.0, omega
    weights = scale * _clenshaw_curtis_weights(n)
    d1 = _cheb_matrix(x) / scale
    return ThetaGrid(omega=float(omega), nodes=nodes, weights=weights, d1=d1)


def make_t_grid(
    t_max: float,
    n: int,
    grading: Literal["uniform", "exponential"] = "exponential",
    residual_tol: float = 1e-6,
    gamma: float = 2.0,
) -> TGrid:
    """
    Сетка на [0, t_max]. Для grading="exponential" используется отображение
    t = t_max (e^{γξ} − 1)/(e^γ − 1), ξ ∈ [0, 1].
    """
    if t_max <= 0:
        raise ConfigurationError(f"t_max must be positive, got {t_max}")
    if n < MIN_NODES:
        raise ConfigurationError(f"t grid needs n >= {MIN_NODES}, got {n}")
    if math.exp(-2.0 * t_max) >= residual_tol:
        raise TruncationError(
            f"e^(-2 t_max) = {math.exp(-2.0 * t_max):.3e} >= residual_tol = {residual_tol:.1e}",
            t_max=t_max,
        )

    x = _cheb_nodes(n)
    xi = (x + 1.0) / 2.0
    d_xi = 2.0 * _cheb_matrix(x)
    w_xi = _clenshaw_curtis_weights(n) / 2.0

    if grading == "uniform":
        nodes = t_max * xi
        jac = np.full(n, t_max)
    elif grading == "exponential":
        denom = math.expm1(gamma)
        nodes = t_max * np.expm1(gamma * xi) / denom
        jac = t_max * gamma * np.exp(gamma * xi) / denom
    else:
        raise ConfigurationError(f"unknown grading {grading!r}")

    nodes[0], nodes[-1] = 0.0, t_max
    return TGrid(
        t_max=float(t_max),
        grading=grading,
        nodes=nodes,
        weights=w_xi * jac,
        d1=d_xi / jac[:, None],
        gamma=float(gamma),
    )


def derivative(values: np.ndarray, grid: Grid, order: int = 1, axis: int = 0) -> np.ndarray:
    """Спектральная производная порядка 1..4 вдоль оси `axis`."""
    if order not in (1, 2, 3, 4):
        raise ConfigurationError(f"derivative order must be 1..4, got {order}")
    if grid.n < order + 4:
        raise ConfigurationError(f"grid with {grid.n} nodes is too small for order {order}")
    mat = grid.diff_matrix(order)
    moved = np.moveaxis(np.asarray(values), axis, 0)
    out = np.tensordot(mat, moved, axes=([1], [0]))
    return np.moveaxis(out, 0, axis)


def lp_norm(values: np.ndarray, grid: Grid, p: float = 2.0, axis: int = 0) -> np.ndarray:
    """(Σ w |f|^p)^{1/p} вдоль оси `axis`."""
    return grid.integrate(np.abs(values) ** p, axis=axis) ** (1.0 / p)


# =========================
# Элементы X и E
# =========================
@dataclass(frozen=True, eq=False)
class XFunction:
    """Пара (ψ₁, ψ₂) на θ-сетке."""
    psi1: np.ndarray
    psi2: np.ndarray
    in_domain: bool = False

    def __post_init__(self):
        object.__setattr__(self, "psi1", np.asarray(self.psi1, dtype=complex))
        object.__setattr__(self, "psi2", np.asarray(self.psi2, dtype=complex))

    @classmethod
    def zeros(cls, n: int) -> "XFunction":
        return cls(np.zeros(n), np.zeros(n), in_domain=True)

    def __add__(self, other: "XFunction") -> "XFunction":
        return XFunction(self.psi1 + other.psi1, self.psi2 + other.psi2, self.in_domain and other.in_domain)

    def __sub__(self, other: "XFunction") -> "XFunction":
        return XFunction(self.psi1 - other.psi1, self.psi2 - other.psi2, self.in_domain and other.in_domain)

    def __mul__(self, c: complex) -> "XFunction":
        return XFunction(c * self.psi1, c * self.psi2, self.in_domain)

    __rmul__ = __mul__

    def boundary_defects(self, grid: ThetaGrid) -> np.ndarray:
        """|ψ₁(0)|, |ψ₁(ω)|, |ψ₁′(0)|, |ψ₁′(ω)|, |ψ₂(0)|, |ψ₂(ω)|"""
        d = derivative(self.psi1, grid, 1)
        return np.abs([self.psi1[0], self.psi1[-1], d[0], d[-1], self.psi2[0], self.psi2[-1]])

    def check_domain(self, grid: ThetaGrid, tol: float) -> bool:
        return bool(np.all(self.boundary_defects(grid) < tol))


@dataclass(frozen=True, eq=False)
class Field:
    """
    X-значная функция на t-сетке: psi1, psi2 имеют форму (n_t, n_θ).
    Строка i соответствует узлу t_i.
    """
    theta_grid: ThetaGrid
    t_grid: TGrid
    psi1: np.ndarray
    psi2: np.ndarray
    vanishing: bool = False

    def __post_init__(self):
        shape = (self.t_grid.n, self.theta_grid.n)
        for name in ("psi1", "psi2"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.shape != shape:
                raise ConfigurationError(f"{name} has shape {arr.shape}, expected {shape}")
            object.__setattr__(self, name, arr)

    @classmethod
    def zeros(cls, theta_grid: ThetaGrid, t_grid: TGrid) -> "Field":
        shape = (t_grid.n, theta_grid.n)
        return cls(theta_grid, t_grid, np.zeros(shape), np.zeros(shape), vanishing=True)

    @classmethod
    def from_function(cls, theta_grid: ThetaGrid, t_grid: TGrid, psi1, psi2) -> "Field":
        """psi1, psi2: вызываемые (t, θ) -> значения, векторизованные по сетке."""
        tt, th = np.meshgrid(t_grid.nodes, theta_grid.nodes, indexing="ij")
        return cls(theta_grid, t_grid, psi1(tt, th) * np.ones_like(tt), psi2(tt, th) * np.ones_like(tt))

    def replace(self, psi1=None, psi2=None, vanishing: bool = False) -> "Field":
        return Field(
            self.theta_grid,
            self.t_grid,
            self.psi1 if psi1 is None else psi1,
            self.psi2 if psi2 is None else psi2,
            vanishing,
        )

    def __getitem__(self, i: int) -> XFunction:
        return XFunction(self.psi1[i], self.psi2[i])

    def __add__(self, other: "Field") -> "Field":
        return self.replace(self.psi1 + other.psi1, self.psi2 + other.psi2)

    def __sub__(self, other: "Field") -> "Field":
        return self.replace(self.psi1 - other.psi1, self.psi2 - other.psi2)

    def __mul__(self, c: complex) -> "Field":
        return self.replace(c * self.psi1, c * self.psi2, self.vanishing)

    __rmul__ = __mul__

    @property
    def real(self) -> "Field":
        return self.replace(self.psi1.real, self.psi2.real, self.vanishing)

    @property
    def imag(self) -> "Field":
        return self.replace(self.psi1.imag, self.psi2.imag)

    def endpoint_norms(self, p: float = 2.0) -> tuple[float, float]:
        norms = _x_norm_rows(self.psi1[[0, -1]], self.psi2[[0, -1]], self.theta_grid, p)
        return float(norms[0]), float(norms[1])


# =========================
# Нормы
# =========================
def _x_norm_rows(psi1: np.ndarray, psi2: np.ndarray, grid: ThetaGrid, p: float) -> np.ndarray:
    d1 = derivative(psi1, grid, 1, axis=-1)
    d2 = derivative(psi1, grid, 2, axis=-1)
    return sum(lp_norm(g, grid, p, axis=-1) for g in (psi1, d1, d2, psi2))


def x_norm(f: XFunction, grid: ThetaGrid, p: float = 2.0) -> float:
    """‖ψ₁‖ + ‖ψ₁′‖ + ‖ψ₁″‖ + ‖ψ₂‖ в Lᵖ(0, ω)."""
    return float(_x_norm_rows(f.psi1, f.psi2, grid, p))


def field_norm(V: Field, p: float = 2.0) -> float:
    """Lᵖ(0, t_max) норма функции t ↦ ‖V(t)‖_X."""
    rows = _x_norm_rows(V.psi1, V.psi2, V.theta_grid, p)
    return float(lp_norm(rows, V.t_grid, p))


# =========================
# Ядро-свёртка
# =========================
def kernel_convolution(alpha: complex, f: np.ndarray, grid: ThetaGrid) -> np.ndarray:
    """
    K(x) = ∫₀ˣ e^{−(x−s)α} f(s) ds + ∫ₓ^ω e^{−(s−x)α} f(s) ds.

    K — единственное решение K″ − α²K = −2αf с условиями Робена
    K′(0) = αK(0), K′(ω) = −αK(ω); задача решается коллокацией.
    `f` может быть матрицей (n, m): столбцы обрабатываются одновременно.
    """
    alpha = complex(alpha)
    if alpha.real <= 0:
        raise DomainError(f"kernel_convolution needs Re α > 0, got α = {alpha}")

    f = np.asarray(f, dtype=complex)
    n = grid.n
    d1 = grid.diff_matrix(1)
    mat = grid.diff_matrix(2) - alpha**2 * np.eye(n)
    mat = mat.astype(complex)
    mat[0] = d1[0]
    mat[0, 0] -= alpha
    mat[-1] = d1[-1]
    mat[-1, -1] += alpha

    rhs = -2.0 * alpha * f
    rhs[0] = 0.0
    rhs[-1] = 0.0
    return scl.solve(mat, rhs)
