# app/numerics/resolvent_theta.py
"""
Резольвента (A − λI)⁻¹ по θ.

Первая компонента ψ₁ решает
    ψ₁⁽⁴⁾ + 2(λ+1)ψ₁″ + (λ−1)²ψ₁ = G_λ,  G_λ = −F₂ − 2(F₁″ − F₁) − λF₁,
    ψ₁(0) = ψ₁(ω) = ψ₁′(0) = ψ₁′(ω) = 0,
вторая ψ₂ = λψ₁ + F₁.

Явный путь собирает ψ₁ из экспоненциальных блоков и свёрток
kernel_convolution; прямой путь — чебышёвская коллокация. Оракул
oracle_bvp — независимая пятидиагональная разностная схема.

Все функции принимают данные формы (n,) или (n, m): столбцы — независимые
правые части (узлы t при обращении суммы).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
import scipy.linalg as scl
from scipy.integrate import trapezoid
from scipy.interpolate import BarycentricInterpolator

from app.errors import ConfigurationError, DomainError, EigenvalueProximityError, PreconditionError
from app.logger import get_logger
from app.numerics.grids import ThetaGrid, XFunction, derivative, kernel_convolution

log = get_logger("resolvent_theta")

BRANCH_CUT_MARGIN = 0.25
# явная формула, пока слой e^{−θ√(−λ)} разрешается сеткой: |√(−λ)|·ω ≤ RESOLVED_LAYER·n
RESOLVED_LAYER = 0.25


@dataclass(frozen=True)
class CharRoots:
    alpha1: complex
    alpha2: complex
    alpha3: complex
    alpha4: complex
    sqrt_minus_lambda: complex

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return self.alpha1, self.alpha2, self.alpha3, self.alpha4


@dataclass(frozen=True, eq=False)
class ResolventIntermediates:
    lam: complex
    roots: CharRoots
    U1: complex
    U2: complex
    betas: tuple[complex, complex, complex, complex]
    I_fn: np.ndarray
    v_fn: np.ndarray
    J_fn: np.ndarray
    S_fn: np.ndarray
    G_lambda: np.ndarray
    endpoints: dict


def _on_positive_axis(lam: complex, tol: float = 0.0) -> bool:
    return abs(lam.imag) <= tol and lam.real >= -tol


def _col(vec: np.ndarray, like: np.ndarray) -> np.ndarray:
    """Вектор по θ, расширенный до формы данных (n, m)."""
    return vec.reshape(vec.shape + (1,) * (like.ndim - 1))


def u_values(lam: complex, omega: float) -> tuple[complex, complex]:
    """U₁,₂ = 1 − e^{−2ωs} ∓ 2s e^{−ωs} sin ω, s = √(−λ)."""
    s = np.sqrt(-complex(lam))
    e = np.exp(-omega * s)
    corr = 2.0 * s * e * math.sin(omega)
    return complex(1.0 - e * e - corr), complex(1.0 - e * e + corr)


def h_lower(x: float) -> float:
    """h(x) = 1 − e^{−2x} − 2x e^{−x}: нижняя граница U₁, U₂ при λ < 0."""
    return 1.0 - math.exp(-2.0 * x) - 2.0 * x * math.exp(-x)


# =========================
# Характеристические корни
# =========================
def char_roots(lam: complex) -> CharRoots:
    lam = complex(lam)
    if _on_positive_axis(lam):
        raise DomainError(f"λ = {lam} lies on [0, +∞): use the collocation dispatch")
    s = complex(np.sqrt(-lam))
    a1, a2 = s + 1j, s - 1j
    return CharRoots(a1, a2, -a1, -a2, s)


def g_lambda(lam: complex, F1: np.ndarray, F2: np.ndarray, grid: ThetaGrid, tol: float = 1e-6) -> np.ndarray:
    """G_λ = −F₂ − 2(F₁″ − F₁) − λF₁; F₁ должна лежать в W₀²ᵖ."""
    F1 = np.asarray(F1, dtype=complex)
    F2 = np.asarray(F2, dtype=complex)
    d1 = derivative(F1, grid, 1)
    scale = max(1.0, float(np.max(np.abs(F1)))) if F1.size else 1.0
    defects = np.abs(np.stack([F1[0], F1[-1], d1[0], d1[-1]]))
    if np.any(defects > tol * scale):
        raise PreconditionError(
            "F1 violates the clamped flags F1 = F1' = 0 at θ = 0, ω",
            max_defect=float(defects.max()),
        )
    return -F2 - 2.0 * (derivative(F1, grid, 2) - F1) - lam * F1


# =========================
# Явные формулы
# =========================
def compute_intermediates(
    lam: complex,
    F1: np.ndarray,
    F2: np.ndarray,
    grid: ThetaGrid,
    newton_tol: float = 1e-12,
) -> ResolventIntermediates:
    """I, v, J, S, U₁, U₂ и β₁..β₄ в порядке вычисления."""
    lam = complex(lam)
    roots = char_roots(lam)
    s = roots.sqrt_minus_lambda
    if s.real <= 0:
        raise DomainError(f"Re √(−λ) must be positive, got {s}")

    F1 = np.asarray(F1, dtype=complex)
    F2 = np.asarray(F2, dtype=complex)
    omega = grid.omega
    theta = grid.nodes
    a1, a2 = roots.alpha1, roots.alpha2
    G = g_lambda(lam, F1, F2, grid)
    F1pp = derivative(F1, grid, 2)

    U1, U2 = u_values(lam, omega)
    if min(abs(U1), abs(U2)) < newton_tol:
        raise EigenvalueProximityError(
            f"λ = {lam} is numerically an eigenvalue of A",
            U1=abs(U1), U2=abs(U2),
        )

    # I = K_{α₁}(−F₂ − 2(F₁″ − F₁) − (λ/α₁²)F₁″)
    I = kernel_convolution(a1, -F2 - 2.0 * (F1pp - F1) - (lam / a1**2) * F1pp, grid)

    a = np.exp(-omega * a1)
    b = np.exp(-omega * a2)
    W = 1.0 / (1.0 - a * a)
    Z = 1.0 / (1.0 - b * b)
    left1 = _col(np.exp(-theta * a1), I)
    right1 = _col(np.exp(-(omega - theta) * a1), I)
    left2 = _col(np.exp(-theta * a2), I)
    right2 = _col(np.exp(-(omega - theta) * a2), I)
    c12 = lam / (a1**2 * a2**2)

    I0, Iw = I[0], I[-1]
    v = (
        W * left1 / (2 * a1) * (I0 - a * Iw)
        + W * right1 / (2 * a1) * (Iw - a * I0)
        - I / (2 * a1)
        + c12 * F1pp
    )

    J = kernel_convolution(a2, v, grid)
    J0, Jw = J[0], J[-1]
    S = (
        Z * left2 / (2 * a2) * (J0 - b * Jw)
        + Z * right2 / (2 * a2) * (Jw - b * J0)
        - J / (2 * a2)
        - c12 * F1
    )

    beta2 = -(J0 - Jw) / (4j * U1)
    beta1 = -beta2 * (1 - a) / (1 - b)
    beta4 = -(J0 + Jw) / (4j * U2)
    beta3 = -beta4 * (1 + a) / (1 + b)

    return ResolventIntermediates(
        lam=lam,
        roots=roots,
        U1=U1,
        U2=U2,
        betas=(beta1, beta2, beta3, beta4),
        I_fn=I,
        v_fn=v,
        J_fn=J,
        S_fn=S,
        G_lambda=G,
        endpoints={"I0": I0, "Iw": Iw, "J0": J0, "Jw": Jw},
    )


def _exponential_blocks(inter: ResolventIntermediates, grid: ThetaGrid) -> np.ndarray:
    """Однородная часть: четыре экспоненциальных блока с коэффициентами β₁..β₄."""
    omega, theta = grid.omega, grid.nodes
    a1, a2 = inter.roots.alpha1, inter.roots.alpha2
    b1, b2, b3, b4 = inter.betas
    S = inter.S_fn
    left1 = _col(np.exp(-theta * a1), S)
    right1 = _col(np.exp(-(omega - theta) * a1), S)
    left2 = _col(np.exp(-theta * a2), S)
    right2 = _col(np.exp(-(omega - theta) * a2), S)
    return (
        left2 * (b1 + b2 + b3 + b4)
        + right2 * (b3 + b4 - b1 - b2)
        + (left1 - left2) * (b2 + b4)
        + (right1 - right2) * (b4 - b2)
    )


def psi1_from(inter: ResolventIntermediates, lam: complex, grid: ThetaGrid) -> np.ndarray:
    """ψ₁ из четырёх экспоненциальных блоков и частного решения S."""
    return _exponential_blocks(inter, grid) + inter.S_fn


def psi2_from(
    inter: ResolventIntermediates,
    lam: complex,
    F1: np.ndarray,
    grid: ThetaGrid,
) -> np.ndarray:
    """
    ψ₂ по блокам: λ·(блоки) + λ·S₀ + (1 − λ²/(α₁α₂)²)·F₁,
    S₀ = S + λF₁/(α₁α₂)²: часть S без слагаемого с F₁.
    """
    lam = complex(lam)
    a1, a2 = inter.roots.alpha1, inter.roots.alpha2
    F1 = np.broadcast_to(np.asarray(F1, dtype=complex), inter.S_fn.shape)
    c12 = lam / (a1**2 * a2**2)
    S0 = inter.S_fn + c12 * F1
    return lam * _exponential_blocks(inter, grid) + lam * S0 + (1.0 - lam * c12) * F1


# =========================
# Коллокация
# =========================
def _collocation_psi1(lam: complex, G: np.ndarray, grid: ThetaGrid) -> np.ndarray:
    n = grid.n
    d1 = grid.diff_matrix(1)
    mat = (
        grid.diff_matrix(4)
        + 2.0 * (lam + 1.0) * grid.diff_matrix(2)
        + (lam - 1.0) ** 2 * np.eye(n)
    ).astype(complex)
    rhs = np.array(G, dtype=complex)
    # ψ(0) = ψ(ω) = 0 и ψ′(0) = ψ′(ω) = 0 вместо строк 0, n−1, 1, n−2
    mat[0] = 0.0
    mat[0, 0] = 1.0
    mat[-1] = 0.0
    mat[-1, -1] = 1.0
    mat[1] = d1[0]
    mat[-2] = d1[-1]
    rhs[[0, 1, -2, -1]] = 0.0
    try:
        return scl.solve(mat, rhs)
    except scl.LinAlgError as e:
        raise ConfigurationError(f"singular collocation matrix at λ = {lam}") from e


def solve_a_zero(F1: np.ndarray, F2: np.ndarray, grid: ThetaGrid) -> XFunction:
    """A⁻¹F: ψ₁⁽⁴⁾ + 2ψ₁″ + ψ₁ = −F₂ − 2(F₁″ − F₁), ψ₂ = F₁."""
    F1 = np.asarray(F1, dtype=complex)
    G = g_lambda(0.0, F1, F2, grid)
    psi1 = _collocation_psi1(0.0, G, grid)
    return XFunction(psi1, F1.copy(), in_domain=True)


# =========================
# Диспетчер
# =========================
ThetaMethod = Literal["auto", "explicit", "collocation"]


def choose_method(
    lam: complex,
    omega: float,
    eps0: float,
    method: ThetaMethod = "auto",
    n: int | None = None,
) -> str:
    """
    auto: коллокация в круге |λ| < ε₀, у положительной полуоси и, если задано
    число узлов n, там, где пограничный слой явного решения тоньше сетки.
    Иначе явная формула.
    """
    if method != "auto":
        return method
    lam = complex(lam)
    if abs(lam) < eps0:
        return "collocation"
    s = np.sqrt(-lam)
    if s.real * omega < BRANCH_CUT_MARGIN:
        return "collocation"
    if n is not None and abs(s) * omega > RESOLVED_LAYER * n:
        return "collocation"
    return "explicit"


def resolve_a_arrays(
    lam: complex,
    F1: np.ndarray,
    F2: np.ndarray,
    grid: ThetaGrid,
    eps0: float = 1.0,
    newton_tol: float = 1e-12,
    method: ThetaMethod = "auto",
) -> tuple[np.ndarray, np.ndarray]:
    """(A − λI)⁻¹(F₁, F₂) для данных формы (n,) или (n, m)."""
    lam = complex(lam)
    F1 = np.asarray(F1, dtype=complex)
    F2 = np.asarray(F2, dtype=complex)
    chosen = choose_method(lam, grid.omega, eps0, method, grid.n)

    if chosen == "explicit":
        if abs(lam) >= eps0 and _on_positive_axis(lam, newton_tol):
            raise DomainError(f"λ = {lam} is within {newton_tol:g} of the branch cut [0, +∞)")
        inter = compute_intermediates(lam, F1, F2, grid, newton_tol)
        psi1 = psi1_from(inter, lam, grid)
        return psi1, psi2_from(inter, lam, F1, grid)
    if chosen == "collocation":
        psi1 = _collocation_psi1(lam, g_lambda(lam, F1, F2, grid), grid)
        return psi1, lam * psi1 + F1
    raise ConfigurationError(f"unknown theta method {method!r}")


def resolve_a(
    lam: complex,
    F: XFunction,
    grid: ThetaGrid,
    eps0: float = 1.0,
    newton_tol: float = 1e-12,
    method: ThetaMethod = "auto",
) -> XFunction:
    psi1, psi2 = resolve_a_arrays(lam, F.psi1, F.psi2, grid, eps0, newton_tol, method)
    return XFunction(psi1, psi2, in_domain=True)


# =========================
# Оракул
# =========================
@dataclass(frozen=True, eq=False)
class OracleSolution:
    nodes: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray
    condition: float | None = None

    def x_norm(self, p: float = 2.0) -> float:
        return _uniform_x_norm(self.psi1, self.psi2, self.nodes, p)


def _uniform_x_norm(psi1: np.ndarray, psi2: np.ndarray, nodes: np.ndarray, p: float) -> float:
    d1 = np.gradient(psi1, nodes, edge_order=2)
    d2 = np.gradient(d1, nodes, edge_order=2)
    return float(sum(trapezoid(np.abs(g) ** p, nodes) ** (1.0 / p) for g in (psi1, d1, d2, psi2)))


def oracle_bvp(
    lam: complex,
    F1: Callable[[np.ndarray], np.ndarray],
    F2: Callable[[np.ndarray], np.ndarray],
    n: int,
    omega: float,
    with_condition: bool = False,
) -> OracleSolution:
    """
    Разностная схема второго порядка на n+1 равномерных узлах;
    условия ψ′ = 0 через фиктивные узлы ψ₋₁ = ψ₁, ψ_{n+1} = ψ_{n−1}.
    """
    lam = complex(lam)
    h = omega / n
    nodes = np.linspace(0.0, omega, n + 1)
    inner = nodes[1:-1]
    f1 = np.asarray(F1(inner), dtype=complex)
    f1pp = (np.asarray(F1(inner - h)) - 2.0 * f1 + np.asarray(F1(inner + h))) / h**2
    G = -np.asarray(F2(inner), dtype=complex) - 2.0 * (f1pp - f1) - lam * f1

    m = n - 1
    c4 = 1.0 / h**4
    c2 = 2.0 * (lam + 1.0) / h**2
    c0 = (lam - 1.0) ** 2
    main = np.full(m, 6.0 * c4 - 2.0 * c2 + c0, dtype=complex)
    main[0] += c4
    main[-1] += c4
    off1 = np.full(m - 1, -4.0 * c4 + c2, dtype=complex)
    off2 = np.full(m - 2, c4, dtype=complex)

    ab = np.zeros((5, m), dtype=complex)
    ab[0, 2:] = off2
    ab[1, 1:] = off1
    ab[2, :] = main
    ab[3, :-1] = off1
    ab[4, :-2] = off2

    condition = None
    if with_condition:
        dense = np.diag(main) + np.diag(off1, 1) + np.diag(off1, -1) + np.diag(off2, 2) + np.diag(off2, -2)
        condition = float(np.linalg.cond(dense))

    try:
        inner_psi = scl.solve_banded((2, 2), ab, G)
    except scl.LinAlgError:
        log.warning(f"⚠️ Матрица оракула вырождена при λ = {lam}: λ — собственное значение")
        inner_psi = np.full(m, np.nan, dtype=complex)
        condition = math.inf

    psi1 = np.concatenate([[0.0], inner_psi, [0.0]])
    psi2 = lam * psi1 + np.asarray(F1(nodes), dtype=complex)
    return OracleSolution(nodes=nodes, psi1=psi1, psi2=psi2, condition=condition)


def oracle_relative_error(
    lam: complex,
    F1: Callable[[np.ndarray], np.ndarray],
    F2: Callable[[np.ndarray], np.ndarray],
    grid: ThetaGrid,
    n: int = 512,
    p: float = 2.0,
    eps0: float = 1.0,
    method: ThetaMethod = "auto",
) -> float:
    """‖resolve_a − oracle_bvp‖_X / ‖oracle_bvp‖_X на равномерной сетке оракула."""
    theta = grid.nodes
    psi1, psi2 = resolve_a_arrays(lam, F1(theta), F2(theta), grid, eps0=eps0, method=method)
    oracle = oracle_bvp(lam, F1, F2, n, grid.omega)

    # производные спектрально на θ-сетке, затем интерполяция на узлы оракула
    parts = [psi1, derivative(psi1, grid, 1), derivative(psi1, grid, 2), psi2]
    on_uniform = [BarycentricInterpolator(theta, part)(oracle.nodes) for part in parts]

    d1 = np.gradient(oracle.psi1, oracle.nodes, edge_order=2)
    d2 = np.gradient(d1, oracle.nodes, edge_order=2)
    ref = [oracle.psi1, d1, d2, oracle.psi2]
    diff = sum(trapezoid(np.abs(a - b) ** p, oracle.nodes) ** (1.0 / p) for a, b in zip(on_uniform, ref))
    return float(diff / oracle.x_norm(p))
