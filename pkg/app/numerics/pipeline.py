# app/numerics/pipeline.py
"""
Полное решение (L₁,μ + L₂)V + kρ²(P₁ + P₂,μ)V = F итерацией

    V⁰ = Σ⁻¹F,   Vᵐ⁺¹ = Σ⁻¹(F − kρ²(P₁ + P₂,μ)Vᵐ),   Σ = L₁,μ + L₂,

а также переход от функции f на секторе к правой части F и обратно от V
к прогибу u(r, θ).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import BarycentricInterpolator, KroghInterpolator

from app.errors import ConfigurationError, DivergenceError, IngestionError, SpectralConditionError
from app.logger import get_logger
from app.numerics.grids import Field, Params, TGrid, ThetaGrid, derivative, field_norm
from app.numerics.resolvent_t import TMethod, apply_l1
from app.numerics.resolvent_theta import ThetaMethod
from app.numerics.spectra import RootTable, SpectralConstants, check_condition, tau_of
from app.numerics.sum_inverter import Contour, apply_a_field, build_contour, invert_sum

log = get_logger("pipeline")

SectorFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

CONTRACTION_TARGET = 0.9
STALL_LIMIT = 3
EDGE_STENCIL = 6


# =========================
# Возмущения P₁, P₂
# =========================
def _decay(V: Field) -> np.ndarray:
    return np.exp(-2.0 * V.t_grid.nodes)[:, None]


def apply_p1(V: Field) -> Field:
    """[P₁V](t) = −e^{−2t}(0, ψ₁″ + ψ₁ + ψ₂)."""
    d2 = derivative(V.psi1, V.theta_grid, 2, axis=1)
    second = -_decay(V) * (d2 + V.psi1 + V.psi2)
    return V.replace(np.zeros_like(V.psi1), second)


def apply_p2(V: Field, mu: float) -> Field:
    """[P₂,μV](t) = (0, 2e^{−2t}(V₁′ − μV₁))."""
    dt = derivative(V.psi1, V.t_grid, 1, axis=0)
    second = 2.0 * _decay(V) * (dt - mu * V.psi1)
    return V.replace(np.zeros_like(V.psi1), second)


def apply_perturbation(V: Field, params: Params) -> Field:
    """kρ²(P₁ + P₂,μ)V."""
    coeff = params.k * params.rho**2
    if coeff == 0:
        return Field.zeros(V.theta_grid, V.t_grid)
    return (apply_p1(V) + apply_p2(V, params.mu)) * coeff


def interior_defect(D: Field) -> Field:
    """
    Обнуляет строки, где дискретная задача ставит краевые условия:
    узлы t = 0, t_max в обеих компонентах и по два крайних узла θ во второй.
    """
    psi1, psi2 = D.psi1.copy(), D.psi2.copy()
    psi1[[0, -1]] = 0.0
    psi2[[0, -1]] = 0.0
    psi2[:, [0, 1, -2, -1]] = 0.0
    return D.replace(psi1, psi2)


def residual(V: Field, F: Field, params: Params) -> float:
    """‖L₁,μV − AV + kρ²(P₁+P₂)V − F‖ / ‖F‖ только через прямые операторы, вне краевых строк."""
    lhs = apply_l1(V, params.mu) - apply_a_field(V) + apply_perturbation(V, params)
    err = field_norm(interior_defect(lhs - F), params.p)
    scale = field_norm(interior_defect(F), params.p)
    return err / scale if scale > 0 else err


# =========================
# Итерация
# =========================
@dataclass(frozen=True, eq=False)
class SolveResult:
    V: Field
    iterations: int
    corrections: list[float] = field(default_factory=list)

    @property
    def observed_ratio(self) -> float | None:
        """Среднее отношение соседних поправок."""
        c = [x for x in self.corrections if x > 0]
        if len(c) < 2:
            return None
        return float(np.exp(np.mean(np.diff(np.log(c)))))

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "corrections": self.corrections,
            "observed_ratio": self.observed_ratio,
        }


def _stalled(corrections: list[float]) -> bool:
    """Поправки не убывают STALL_LIMIT шагов подряд."""
    if len(corrections) <= STALL_LIMIT:
        return False
    tail = corrections[-(STALL_LIMIT + 1):]
    return all(b >= a for a, b in zip(tail, tail[1:]))


def run_solve(
    F: Field,
    params: Params,
    consts: SpectralConstants,
    table: RootTable,
    contour: Contour | None = None,
    max_iterations: int = 50,
    theta_method: ThetaMethod = "auto",
    t_method: TMethod = "collocation",
    workers: int | None = None,
) -> SolveResult:
    if not check_condition(params.omega, params.mu, table):
        raise SpectralConditionError(
            f"ωμ = {params.omega * params.mu:.4f} >= τ = {tau_of(table):.5f}",
        )
    if contour is None:
        contour = build_contour(params, consts, table)

    def sigma_inv(G: Field) -> Field:
        return invert_sum(G, contour, params, consts, theta_method, t_method, workers)

    V = sigma_inv(F)
    if params.k * params.rho**2 == 0 or field_norm(V, params.p) == 0:
        log.info("✅ Возмущение отсутствует: V = Σ⁻¹F")
        return SolveResult(V=V, iterations=1)

    tol = params.tolerances.neumann_tol
    corrections: list[float] = []
    first_norm = None
    for m in range(1, max_iterations + 1):
        V_next = sigma_inv(F - apply_perturbation(V, params))
        delta = field_norm(V_next - V, params.p)
        corrections.append(delta)
        if first_norm is None:
            first_norm = field_norm(V_next, params.p)
        log.debug(f"Итерация {m}: ‖ΔV‖ = {delta:.3e}")
        V = V_next
        if delta < tol * first_norm:
            log.info(f"✅ Итерация сошлась за {m} шагов")
            return SolveResult(V=V, iterations=m, corrections=corrections)
        if _stalled(corrections):
            raise DivergenceError(
                f"corrections stopped decreasing after {m} iterations; ρ = {params.rho} exceeds ρ₀",
                corrections=corrections,
            )

    raise DivergenceError(
        f"no convergence in {max_iterations} iterations",
        corrections=corrections,
    )


def solve(
    F: Field,
    params: Params,
    consts: SpectralConstants,
    table: RootTable,
    contour: Contour | None = None,
    **kwargs,
) -> Field:
    return run_solve(F, params, consts, table, contour, **kwargs).V


# =========================
# Оценка ρ₀
# =========================
def contraction_factor(params: Params, sample: Field, W: Field) -> float:
    """c(ρ) = kρ²‖(P₁+P₂)W‖ / ‖sample‖, W = Σ⁻¹ sample."""
    unit = params.model_copy(update={"k": 1.0, "rho": 1.0})
    num = field_norm(apply_perturbation(W, unit), params.p)
    return params.k * params.rho**2 * num / field_norm(sample, params.p)


def estimate_rho0(
    params: Params,
    consts: SpectralConstants,
    table: RootTable,
    sample: Field,
    contour: Contour | None = None,
    workers: int | None = None,
    W: Field | None = None,
    power_steps: int = 0,
    rtol: float = 1e-6,
) -> float:
    """
    Наибольшее ρ, при котором c(ρ) < 0.9 на всех тестовых полях.

    Тестовые поля: sample и (при power_steps > 0) её образы
    G_{j+1} = kρ²(P₁+P₂)Σ⁻¹G_j / ‖·‖, то есть степенной метод для
    оператора перехода. Σ⁻¹ от ρ не зависит, поэтому W_j считаются один раз,
    а граница ищется брекетингом и бисекцией по ρ.
    """
    if params.k == 0:
        return math.inf
    if field_norm(sample, params.p) == 0:
        raise IngestionError("sample field must be nonzero")
    if power_steps < 0:
        raise ConfigurationError(f"power_steps must be >= 0, got {power_steps}")

    def sigma_inv(G: Field) -> Field:
        nonlocal contour
        if contour is None:
            contour = build_contour(params, consts, table)
        return invert_sum(G, contour, params, consts, workers=workers)

    pairs = [(sample, sigma_inv(sample) if W is None else W)]
    unit = params.model_copy(update={"k": 1.0, "rho": 1.0})
    for _ in range(power_steps):
        image = apply_perturbation(pairs[-1][1], unit)
        norm = field_norm(image, params.p)
        if norm == 0:
            break
        nxt = image * (1.0 / norm)
        pairs.append((nxt, sigma_inv(nxt)))

    def worst(rho: float) -> float:
        at = params.model_copy(update={"rho": rho})
        return max(contraction_factor(at, g, w) for g, w in pairs)

    if worst(1.0) == 0:
        return math.inf

    lo, hi = 1.0, 1.0
    while worst(hi) < CONTRACTION_TARGET:
        lo, hi = hi, 2.0 * hi
    while worst(lo) >= CONTRACTION_TARGET:
        lo, hi = lo / 2.0, lo
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if worst(mid) < CONTRACTION_TARGET:
            lo = mid
        else:
            hi = mid

    log.info(f"📏 ρ₀ ≈ {lo:.4g} (c(ρ₀) = {worst(lo):.3f}, пробных функций: {len(pairs)})")
    return lo


# =========================
# Сектор ↔ поле
# =========================
def _one(x, y):
    return np.ones_like(x)


def _x(x, y):
    return x


def _bump(x, y):
    # центр на биссектрисе четверти круга
    return np.exp(-8.0 * ((x - 0.35) ** 2 + (y - 0.35) ** 2))


BUILTIN_RHS: dict[str, SectorFunction] = {
    "one": _one,
    "x": _x,
    "bump": _bump,
}


def build_rhs(f: SectorFunction, params: Params, theta_grid: ThetaGrid, t_grid: TGrid) -> Field:
    """
    G(t, θ) = f(ρe^{−t}cos θ, ρe^{−t}sin θ), F = (0, ρ³e^{(μ−3)t}G).
    """
    tt, th = np.meshgrid(t_grid.nodes, theta_grid.nodes, indexing="ij")
    r = params.rho * np.exp(-tt)
    try:
        G = np.asarray(f(r * np.cos(th), r * np.sin(th)), dtype=complex) * np.ones_like(tt)
    except Exception as e:
        raise IngestionError(f"right-hand side failed on the sector grid: {e}") from e
    bad = ~np.isfinite(G)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise IngestionError(
            "right-hand side is not finite on the sector grid",
            r=float(r[i, j]), theta=float(th[i, j]),
        )
    second = params.rho**3 * np.exp((params.mu - 3.0) * tt) * G
    return Field(theta_grid, t_grid, np.zeros_like(second), second)


@dataclass(frozen=True, eq=False)
class SectorSamples:
    """u на полярной сетке; mask отмечает r вне разрешённого кольца."""
    radii: np.ndarray
    thetas: np.ndarray
    u: np.ndarray
    mask: np.ndarray

    def rows(self):
        for i, r in enumerate(self.radii):
            for j, th in enumerate(self.thetas):
                yield float(r), float(th), float(self.u[i, j]), bool(self.mask[i, j])


def reconstruct_u(
    V: Field,
    params: Params,
    radii: np.ndarray | None = None,
    thetas: np.ndarray | None = None,
    n_r: int = 64,
) -> SectorSamples:
    """
    u(r, θ) = r·e^{−μt}·V₁(t)(θ), t = ln(ρ/r).

    По t интерполяция барицентрическая в переменной ξ, в которой узлы
    t-сетки чебышёвские, по θ — по узлам θ-сетки.
    """
    tg, thg = V.t_grid, V.theta_grid
    r_min = params.rho * math.exp(-tg.t_max)
    if radii is None:
        radii = np.geomspace(r_min, params.rho, n_r)
    radii = np.asarray(radii, dtype=float)

    values = V.psi1.real
    if thetas is not None:
        thetas = np.asarray(thetas, dtype=float)
        values = BarycentricInterpolator(thg.nodes, values, axis=1)(thetas)
    else:
        thetas = thg.nodes

    mask = (radii < r_min * (1 - 1e-12)) | (radii <= 0) | (radii > params.rho * (1 + 1e-12))
    t = np.clip(np.log(params.rho / np.where(mask, params.rho, radii)), 0.0, tg.t_max)
    along_t = BarycentricInterpolator(tg.xi_nodes, values, axis=0)
    u = (radii * np.exp(-params.mu * t))[:, None] * along_t(tg.xi_of(t))
    u[mask] = np.nan
    return SectorSamples(radii=radii, thetas=thetas, u=u, mask=np.repeat(mask[:, None], thetas.size, axis=1))


def plate_patch(
    params: Params,
    n_r: int = 121,
    n_theta: int = 97,
    r_range: tuple[float, float] = (0.3, 0.9),
    theta_range: tuple[float, float] = (0.15, 0.85),
) -> tuple[np.ndarray, np.ndarray]:
    """Равномерная сетка внутри сектора: доли ρ по r и доли ω по θ."""
    (r0, r1), (a0, a1) = r_range, theta_range
    if not (0 < r0 < r1 <= 1 and 0 <= a0 < a1 <= 1):
        raise ConfigurationError(f"patch must lie inside the sector, got r {r_range}, θ {theta_range}")
    radii = params.rho * np.linspace(r0, r1, n_r)
    thetas = params.omega * np.linspace(a0, a1, n_theta)
    return radii, thetas


def polar_laplacian(u: np.ndarray, radii: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Δu = u_rr + u_r/r + u_θθ/r² разностями второго порядка."""
    u_r = np.gradient(u, radii, axis=0, edge_order=2)
    u_rr = np.gradient(u_r, radii, axis=0, edge_order=2)
    u_tt = np.gradient(np.gradient(u, thetas, axis=1, edge_order=2), thetas, axis=1, edge_order=2)
    r = radii[:, None]
    return u_rr + u_r / r + u_tt / r**2


def plate_fd_residual(samples: SectorSamples, f: SectorFunction, k: float, margin: int = 4) -> float:
    """
    Относительная невязка Δ²u − kΔu − f разностями на внутренней части
    сетки samples (без `margin` узлов у каждого края). Сетка должна быть
    равномерной и целиком лежать в кольце восстановления: для этого есть
    plate_patch.
    """
    r, th = samples.radii, samples.thetas
    if min(r.size, th.size) <= 2 * margin:
        raise IngestionError("finite-difference patch is empty", n_r=r.size, n_theta=th.size, margin=margin)
    if samples.mask.any() or not np.isfinite(samples.u).all():
        raise IngestionError("finite-difference patch leaves the reconstruction annulus")

    lap = polar_laplacian(samples.u, r, th)
    bilap = polar_laplacian(lap, r, th)
    rr, tt = np.meshgrid(r, th, indexing="ij")
    rhs = np.asarray(f(rr * np.cos(tt), rr * np.sin(tt)), dtype=float) * np.ones_like(rr)
    inner = (slice(margin, -margin), slice(margin, -margin))
    diff = (bilap - k * lap - rhs)[inner]
    scale = np.linalg.norm(rhs[inner])
    return float(np.linalg.norm(diff) / scale) if scale > 0 else float(np.linalg.norm(diff))


def edge_defects(samples: SectorSamples) -> dict[str, float]:
    """
    max |u| и max |∂u/∂θ|/r на лучах θ = 0 и θ = ω. Производная на луче —
    от интерполянта по EDGE_STENCIL ближайшим узлам θ.
    """
    valid = ~samples.mask[:, 0]
    u = samples.u[valid]
    if not u.size:
        return {"u_edge": 0.0, "du_dn_edge": 0.0}
    r = samples.radii[valid]
    th = samples.thetas
    m = min(EDGE_STENCIL, th.size)
    du = np.stack([
        KroghInterpolator(th[:m], u[:, :m], axis=1).derivative(th[0]),
        KroghInterpolator(th[-m:], u[:, -m:], axis=1).derivative(th[-1]),
    ], axis=1) / r[:, None]
    return {
        "u_edge": float(np.max(np.abs(u[:, [0, -1]]))),
        "du_dn_edge": float(np.max(np.abs(du))),
    }
