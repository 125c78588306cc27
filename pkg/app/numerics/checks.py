# app/numerics/checks.py
"""
Численная проверка количественных утверждений теории: супремумы
мультипликатора Михлина, неравенства выпуклости Като, оценки резольвент
A и L₁,μ. Каждая проверка вычисляет обе части неравенства и сохраняет
нарушения с полными данными для воспроизведения.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as scl

from app.errors import DomainError
from app.logger import get_logger
from app.numerics.grids import (
    Field,
    ThetaGrid,
    derivative,
    field_norm,
    lp_norm,
    make_t_grid,
    make_theta_grid,
    x_norm,
    XFunction,
)
from app.numerics.resolvent_t import l1_bound_constant, resolve_l1
from app.numerics.resolvent_theta import compute_intermediates, h_lower, resolve_a, u_values
from app.numerics.spectra import SpectralConstants, in_sigma_l1
from app.numerics.sum_inverter import apply_a
from app.utils.parallel import ordered_map

log = get_logger("checks")

SLACK = 1e-8
# ‖(A − λ)⁻¹F‖ ~ C/|λ|
DECAY_SLOPE = -1.0
DECAY_SLOPE_TOL = 0.1


@dataclass
class Violation:
    check: str
    lhs: float
    rhs: float
    lam: complex | None = None
    trial: int | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        out = asdict(self)
        if self.lam is not None:
            out["lam"] = [complex(self.lam).real, complex(self.lam).imag]
        return out


def _compare(name: str, lhs: float, rhs: float, out: list[Violation], **ctx) -> float:
    """Записывает нарушение lhs ≤ rhs и возвращает отношение lhs/rhs."""
    if lhs > rhs * (1 + SLACK) + SLACK:
        out.append(Violation(check=name, lhs=float(lhs), rhs=float(rhs), **ctx))
    return float(lhs / rhs) if rhs > 0 else 0.0


# =========================
# Случайные допустимые данные
# =========================
def random_clamped_fn(
    omega: float, rng: np.random.Generator, terms: int = 3, min_power: int = 2,
) -> Callable[[np.ndarray], np.ndarray]:
    """Σ c θᵃ(ω−θ)ᵇ, a, b ≥ min_power: функция и производная обращаются в 0 на концах."""
    powers = [tuple(rng.integers(min_power, min_power + 3, size=2)) for _ in range(terms)]
    coeffs = rng.normal(size=terms)

    def f(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return sum(
            c * theta**a * (omega - theta) ** b / (omega / 2) ** (a + b)
            for c, (a, b) in zip(coeffs, powers)
        )

    return f


def random_clamped(grid: ThetaGrid, rng: np.random.Generator, terms: int = 3, min_power: int = 2) -> np.ndarray:
    return random_clamped_fn(grid.omega, rng, terms, min_power)(grid.nodes)


def random_data(grid: ThetaGrid, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    return random_clamped(grid, rng), random_clamped(grid, rng)


def random_data_fn(omega: float, rng: np.random.Generator):
    """Пара случайных F₁, F₂ в виде функций θ, для сравнения с оракулом."""
    return random_clamped_fn(omega, rng), random_clamped_fn(omega, rng)


# =========================
# Мультипликатор Михлина
# =========================
@dataclass
class MihlinReport:
    r: float
    sup_m: float
    sup_xim: float
    sup_xim_exact: float
    claimed_sup_m: float
    claimed_sup_xim: float
    m_matches: bool
    xim_matches: bool

    @property
    def passed(self) -> bool:
        return self.m_matches and self.xim_matches

    def to_dict(self) -> dict:
        return {**asdict(self), "passed": self.passed}


def mihlin_values(r: float, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    m(ξ) = (λ₂^{ir} − λ₁^{ir})/(8πξ), λ₁,₂ = 1 + (1 ± x)², x = 2πξ, и
    ξm′(ξ) = (ir/2)(λ₂^{ir−1}(x − 1) − λ₁^{ir−1}(1 + x)) − m(ξ). ξ ≠ 0.
    """
    x = 2.0 * math.pi * np.asarray(xi, dtype=float)
    lam1 = 1.0 + (1.0 + x) ** 2
    lam2 = 1.0 + (1.0 - x) ** 2
    p1 = np.exp(1j * r * np.log(lam1))
    p2 = np.exp(1j * r * np.log(lam2))
    m = (p2 - p1) / (4.0 * x)
    xim = 0.5j * r * (p2 / lam2 * (x - 1.0) - p1 / lam1 * (1.0 + x)) - m
    return m, xim


def xim_closed_form(r: float, xi: np.ndarray) -> np.ndarray:
    """
    Замкнутая форма (ir/32)(λ₂^{ir−1}(x − 1) − λ₁^{ir−1}(1 + x)) − (λ₂^{ir} − λ₁^{ir})/(32πξ),
    по которой получена константа 3|r|/32. Через точные величины это (ξm′ − 3m)/16;
    предел при ξ → 0 равен 3·2^{ir−5}ir.
    """
    m, xim = mihlin_values(r, xi)
    return (xim - 3.0 * m) / 16.0


def mihlin_scan(r: float, xi_max: float = 1e3, n: int = 4000, rtol: float = 0.01) -> MihlinReport:
    """
    Супремумы |m| и |ξm′| на логарифмической сетке ±ξ, сравнение с |r|/2 и 3|r|/32.
    Пределы при ξ → 0 подставляются аналитически: m(0) = −2^{ir−1}ir, ξm′ → 0,
    замкнутая форма → 3·2^{ir−5}ir. ξm′ сравнивается с 3|r|/32 в замкнутой
    форме; точный супремум x·dm/dx только сообщается.
    """
    if n < 1000:
        raise DomainError(f"mihlin scan needs n >= 1000, got {n}")
    xi = np.logspace(-8, math.log10(xi_max), n)
    xi = np.concatenate([-xi[::-1], xi])
    m, xim = mihlin_values(r, xi)
    m0 = abs(-(2.0 ** (1j * r - 1)) * 1j * r)
    closed0 = abs(3.0 * 2.0 ** (1j * r - 5) * 1j * r)
    sup_m = max(float(np.max(np.abs(m))), m0)
    sup_closed = max(float(np.max(np.abs((xim - 3.0 * m) / 16.0))), closed0)
    sup_exact = float(np.max(np.abs(xim)))

    claimed_m, claimed_xim = abs(r) / 2.0, 3.0 * abs(r) / 32.0
    report = MihlinReport(
        r=float(r),
        sup_m=sup_m,
        sup_xim=sup_closed,
        sup_xim_exact=sup_exact,
        claimed_sup_m=claimed_m,
        claimed_sup_xim=claimed_xim,
        m_matches=abs(sup_m - claimed_m) <= rtol * claimed_m,
        xim_matches=abs(sup_closed - claimed_xim) <= rtol * claimed_xim,
    )
    if not report.passed:
        log.warning(f"⚠️ Михлин r = {r}: sup|m| = {sup_m:.5f} (≠ {claimed_m:.5f}) или sup|ξm′| = {sup_closed:.5f} (≠ {claimed_xim:.5f})")
    elif sup_exact > claimed_xim * (1 + rtol):
        log.info(f"ℹ️ Точный sup|x·dm/dx| = {sup_exact:.5f} при r = {r} больше 3|r|/32 = {claimed_xim:.5f}")
    return report


# =========================
# Неравенства Като
# =========================
@dataclass
class KatoReport:
    seed: int
    samples: int
    te_ratio: float
    max_ratio_half_line: float
    max_ratio_interval: float
    violations: list[Violation] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["violations"] = [v.to_dict() for v in self.violations]
        return out


def half_line_ratio(values: np.ndarray, tgrid, p: float = 2.0) -> float:
    """‖V′‖ / (2√2 ‖V‖^{1/2} ‖V″‖^{1/2}) на [0, t_max]."""
    n0 = float(lp_norm(values, tgrid, p))
    n1 = float(lp_norm(derivative(values, tgrid, 1), tgrid, p))
    n2 = float(lp_norm(derivative(values, tgrid, 2), tgrid, p))
    rhs = 2.0 * math.sqrt(2.0) * math.sqrt(n0 * n2)
    return n1 / rhs if rhs > 0 else 0.0


def interval_rhs(phi: np.ndarray, grid: ThetaGrid, eta: float, p: float = 2.0) -> tuple[float, float]:
    """(‖φ′‖, (ω/η)‖φ″‖ + (2/ω)(η + 3 + 2/η)‖φ‖) на (0, ω)."""
    omega = grid.omega
    lhs = float(lp_norm(derivative(phi, grid, 1), grid, p))
    n0 = float(lp_norm(phi, grid, p))
    n2 = float(lp_norm(derivative(phi, grid, 2), grid, p))
    return lhs, omega / eta * n2 + 2.0 / omega * (eta + 3.0 + 2.0 / eta) * n0


def kato_convexity_check(
    samples: int = 100,
    seed: int = 12345,
    omega: float = math.pi / 2,
    n_theta: int = 48,
    n_t: int = 96,
    t_max: float = 16.0,
    p: float = 2.0,
) -> KatoReport:
    rng = np.random.default_rng(seed)
    tgrid = make_t_grid(t_max, n_t)
    grid = make_theta_grid(omega, n_theta)
    t = tgrid.nodes
    violations: list[Violation] = []

    te_ratio = half_line_ratio(t * np.exp(-t), tgrid, p)
    half_max = te_ratio
    interval_max = 0.0
    for trial in range(samples):
        V = np.zeros_like(t)
        for _ in range(3):
            j = rng.integers(1, 4)
            a = rng.uniform(1.0, 3.0)
            V += rng.normal() * t**j * np.exp(-a * t)
        ratio = _compare("kato_half_line", half_line_ratio(V, tgrid, p), 1.0, violations, trial=trial, seed=seed)
        half_max = max(half_max, ratio)

        phi = random_clamped(grid, rng, min_power=0)
        for eta in (0.5, 1.0, 2.0, rng.uniform(0.1, 5.0)):
            lhs, rhs = interval_rhs(phi, grid, eta, p)
            interval_max = max(interval_max, _compare("kato_interval", lhs, rhs, violations, trial=trial, seed=seed))

    return KatoReport(
        seed=seed,
        samples=samples,
        te_ratio=te_ratio,
        max_ratio_half_line=half_max,
        max_ratio_interval=interval_max,
        violations=violations,
    )


# =========================
# Константы оценки резольвенты A
# =========================
def poincare_constant(grid: ThetaGrid) -> float:
    """
    C_ω с ‖ψ‖ + ‖ψ′‖ + ‖ψ″‖ ≤ C_ω‖ψ″‖ на W₀²²: 1 + sup‖ψ′‖/‖ψ″‖ + sup‖ψ‖/‖ψ″‖,
    супремумы из обобщённой задачи на собственные значения в подпространстве
    сеточных функций с ψ = ψ′ = 0 на концах.
    """
    n = grid.n
    d1, d2 = grid.diff_matrix(1), grid.diff_matrix(2)
    constraints = np.vstack([np.eye(n)[0], np.eye(n)[-1], d1[0], d1[-1]])
    basis = scl.null_space(constraints)
    W = np.diag(grid.weights)

    def gram(mat: np.ndarray) -> np.ndarray:
        m = mat @ basis
        return m.T @ W @ m

    b = gram(d2)
    c = 1.0
    for mat in (d1, np.eye(n)):
        top = scl.eigh(gram(mat), b, eigvals_only=True)[-1]
        c += math.sqrt(max(top, 0.0))
    return c


def resolvent_bound_constants(omega: float, eps0: float, c_omega: float) -> dict[str, float]:
    """M₁…M₄ и M = 3((C_ω + 1)(M₂ + M₃) + M₄) при ε₀."""
    x = omega * math.sqrt(eps0)
    e2 = 1.0 - math.exp(-2.0 * x)
    M1 = 2.0 + 2.0 / e2
    M2 = 2.0 * M1 / e2 + 2.0 * M1 + 1.0
    M3 = 4.0 * M1 * (1.0 + 1.0 / omega) * (1.0 + 1.0 / eps0) / (h_lower(x) * (1.0 - math.exp(-x)))
    M4 = (2.0 / e2 + 1.0) * M1 + 1.0 / eps0 + 1.0
    M = 3.0 * ((c_omega + 1.0) * (M2 + M3) + M4)
    return {"M1": M1, "M2": M2, "M3": M3, "M4": M4, "C_omega": c_omega, "M": M}


@dataclass
class BoundReport:
    seed: int
    trials: int
    lambdas: list[complex]
    constants: dict = field(default_factory=dict)
    max_ratios: dict = field(default_factory=dict)
    decay_slope: float | None = None
    violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "lambdas": [[complex(z).real, complex(z).imag] for z in self.lambdas],
            "constants": self.constants,
            "max_ratios": self.max_ratios,
            "decay_slope": self.decay_slope,
            "passed": self.passed,
            "violations": [v.to_dict() for v in self.violations],
        }


def _a_bounds_for_lambda(
    lam: float,
    data: list[tuple[np.ndarray, np.ndarray]],
    grid: ThetaGrid,
    p: float,
    eps0: float,
    constants: dict[str, float],
    seed: int,
) -> tuple[dict[str, float], list[Violation]]:
    """Оценки для одного λ < 0 по набору случайных F."""
    omega = grid.omega
    s = math.sqrt(-lam)
    q = 1.0 - 1.0 / p
    M1_lam = 2.0 + 2.0 / (1.0 - math.exp(-2.0 * omega * s))
    M1 = constants["M1"]
    x0 = omega * math.sqrt(eps0)
    h0 = h_lower(x0)
    gap = 1.0 - math.exp(-x0)

    theta = grid.nodes
    a1, a2 = s + 1j, s - 1j
    kernel_left = lp_norm(np.exp(-theta * a1) - np.exp(-theta * a2), grid, p)
    kernel_right = lp_norm(np.exp(-(omega - theta) * a1) - np.exp(-(omega - theta) * a2), grid, p)

    violations: list[Violation] = []
    ratios: dict[str, float] = {}

    def check(name: str, lhs: float, rhs: float, trial: int):
        r = _compare(name, lhs, rhs, violations, lam=lam, trial=trial, seed=seed)
        ratios[name] = max(ratios.get(name, 0.0), r)

    def norm(f: np.ndarray) -> float:
        return float(lp_norm(f, grid, p))

    for trial, (F1, F2) in enumerate(data):
        inter = compute_intermediates(lam, F1, F2, grid)
        N = norm(F2) + 2.0 * norm(F1) + 3.0 * norm(derivative(F1, grid, 2))
        I, v, J = inter.I_fn, inter.v_fn, inter.J_fn
        b1, b2, b3, b4 = inter.betas

        check("I_norm", norm(I), 2.0 * N / s, trial)
        check("I_endpoints", abs(I[0]) + abs(I[-1]), 2.0 * N / s**q, trial)
        check("v_norm", norm(v), M1_lam * N / -lam, trial)
        check("J_norm", norm(J), 2.0 * norm(v) / s, trial)
        check("J_endpoints", abs(J[0]) + abs(J[-1]), 2.0 * norm(v) / s**q, trial)
        check("kernel_difference", max(kernel_left, kernel_right), 4.0 / s ** (1.0 + 1.0 / p), trial)

        check(
            "beta_sums",
            max(abs(b1 + b2), abs(b3 + b4)),
            M1 * N / (omega * -lam * s ** (2.0 - 1.0 / p) * h0 * gap),
            trial,
        )
        check("beta_even", max(abs(b2), abs(b4)), M1 * N / (2.0 * -lam * s**q * h0), trial)

        F = XFunction(F1, F2)
        sol = resolve_a(lam, F, grid, eps0=eps0, method="explicit")
        check("resolvent_norm", x_norm(sol, grid, p), constants["M"] / (1.0 + abs(lam)) * x_norm(F, grid, p), trial)

    return ratios, violations


def decay_slope(
    lambdas: list[float],
    grid: ThetaGrid,
    data: tuple[np.ndarray, np.ndarray],
    eps0: float = 1.0,
    p: float = 2.0,
) -> float:
    """Наклон log‖(A − λ)⁻¹F‖_X по log|λ|."""
    F = XFunction(*data)
    norms = [x_norm(resolve_a(lam, F, grid, eps0=eps0), grid, p) for lam in lambdas]
    slope, _ = np.polyfit(np.log(np.abs(lambdas)), np.log(norms), 1)
    return float(slope)


def bound_scan_a(
    lambdas: list[float],
    trials: int = 20,
    omega: float = math.pi / 2,
    n_theta: int = 48,
    p: float = 2.0,
    eps0: float = 1.0,
    seed: int = 12345,
    decay_lambdas: list[float] | None = None,
    workers: int | None = None,
) -> BoundReport:
    lambdas = [float(np.real(lam)) for lam in lambdas]
    if any(lam >= 0 for lam in lambdas):
        raise DomainError("bound_scan_a expects negative λ")
    eps0_eff = min(eps0, min(abs(lam) for lam in lambdas))
    grid = make_theta_grid(omega, n_theta)
    constants = resolvent_bound_constants(omega, eps0_eff, poincare_constant(grid))

    rng = np.random.default_rng(seed)
    data = {lam: [random_data(grid, rng) for _ in range(trials)] for lam in lambdas}

    results = ordered_map(
        lambda lam: _a_bounds_for_lambda(lam, data[lam], grid, p, eps0_eff, constants, seed),
        lambdas,
        workers,
    )
    report = BoundReport(seed=seed, trials=trials * len(lambdas), lambdas=lambdas, constants=constants)
    for ratios, violations in results:
        for k, v in ratios.items():
            report.max_ratios[k] = max(report.max_ratios.get(k, 0.0), v)
        report.violations.extend(violations)

    if decay_lambdas:
        fine = make_theta_grid(omega, max(n_theta, 96))
        report.decay_slope = decay_slope(decay_lambdas, fine, random_data(fine, rng), eps0_eff, p)
        if abs(report.decay_slope - DECAY_SLOPE) > DECAY_SLOPE_TOL:
            report.violations.append(
                Violation(check="decay_slope", lhs=report.decay_slope, rhs=DECAY_SLOPE, seed=seed)
            )

    log.info(f"📐 Оценки A: {report.trials} испытаний, нарушений {len(report.violations)}")
    return report


# =========================
# Оценка резольвенты L₁,μ
# =========================
def bound_scan_l1(
    lambdas: list[complex],
    trials: int = 20,
    mu: float = 0.0,
    eps: float = 0.1,
    n_t: int = 64,
    t_max: float = 16.0,
    n_theta: int = 12,
    omega: float = math.pi / 2,
    p: float = 2.0,
    seed: int = 12345,
) -> BoundReport:
    """‖(L₁,μ − λ)⁻¹R‖_E ≤ (4/sin ε)/|λ| ‖R‖_E для λ ∈ Σ_{L₁,μ}."""
    consts = SpectralConstants(eps_l1=eps, eps_l2=max(0.3, 2.5 * eps))
    for lam in lambdas:
        if not in_sigma_l1(lam, mu, consts):
            raise DomainError(f"λ = {lam} is outside Σ_L1 for μ = {mu}, ε = {eps}")

    M = l1_bound_constant(eps)
    tgrid = make_t_grid(t_max, n_t)
    grid = make_theta_grid(omega, n_theta)
    rng = np.random.default_rng(seed)
    t = tgrid.nodes[:, None]

    report = BoundReport(seed=seed, trials=trials * len(lambdas), lambdas=list(lambdas), constants={"M": M})
    for trial in range(trials):
        decay = rng.uniform(0.5, 2.0)
        shape = (1.0 + rng.normal() * t) * np.exp(-decay * t)
        R = Field(grid, tgrid, shape * random_clamped(grid, rng)[None, :], shape * random_clamped(grid, rng)[None, :])
        r_norm = field_norm(R, p)
        for lam in lambdas:
            V = resolve_l1(lam, R, mu)
            ratio = _compare(
                "l1_resolvent", field_norm(V, p), M / abs(lam) * r_norm, report.violations,
                lam=complex(lam), trial=trial, seed=seed,
            )
            report.max_ratios["l1_resolvent"] = max(report.max_ratios.get("l1_resolvent", 0.0), ratio)
    return report


# =========================
# Положительность U₁, U₂
# =========================
def u_positivity_scan(omegas: list[float], lambdas: list[float]) -> BoundReport:
    """min(U₁, U₂) ≥ h(ω√−λ) > 0 для λ < 0 и ω ∈ (0, 2π]."""
    report = BoundReport(seed=0, trials=len(omegas) * len(lambdas), lambdas=list(lambdas))
    worst = 0.0
    for omega in omegas:
        for lam in lambdas:
            U1, U2 = u_values(lam, omega)
            h = h_lower(omega * math.sqrt(-lam))
            lower = min(U1.real, U2.real)
            if h <= 0:
                report.violations.append(Violation(check="h_positive", lhs=0.0, rhs=h, lam=lam))
            # U ≥ h записано как h ≤ U
            worst = max(worst, _compare("u_lower_bound", h, lower, report.violations, lam=lam))
    report.max_ratios["u_lower_bound"] = worst
    return report


# =========================
# Интерполяционное неравенство для A
# =========================
def g1_norm(w: XFunction, grid: ThetaGrid, p: float = 2.0) -> float:
    """‖ψ₁‖_{W³ᵖ} + ‖ψ₂‖_{Lᵖ}."""
    parts = [w.psi1] + [derivative(w.psi1, grid, k) for k in (1, 2, 3)] + [w.psi2]
    return float(sum(lp_norm(f, grid, p) for f in parts))


def convexity_check_a(
    lambdas: list[float],
    trials: int = 10,
    omega: float = math.pi / 2,
    n_theta: int = 48,
    p: float = 2.0,
    seed: int = 12345,
) -> BoundReport:
    """
    Отношение ‖w‖_{G₁} / (‖w‖_X + ‖w‖_X^{1/2}‖Aw‖_X^{1/2}) для w = (A − λ)⁻¹F.
    Максимум по выборке есть эмпирическая константа C.
    """
    grid = make_theta_grid(omega, n_theta)
    rng = np.random.default_rng(seed)
    report = BoundReport(seed=seed, trials=trials * len(lambdas), lambdas=list(lambdas))
    for lam in lambdas:
        worst = 0.0
        for _ in range(trials):
            w = resolve_a(lam, XFunction(*random_data(grid, rng)), grid)
            xn = x_norm(w, grid, p)
            an = x_norm(apply_a(w, grid), grid, p)
            worst = max(worst, g1_norm(w, grid, p) / (xn + math.sqrt(xn * an)))
        report.max_ratios[f"{lam:g}"] = worst
    report.constants["C"] = max(report.max_ratios.values(), default=0.0)
    return report


# =========================
# Сводный прогон
# =========================
SUITES = ("mihlin", "kato", "bounds", "all")


def run_verification(suite: str = "all", seed: int = 12345, trials: int = 100, workers: int | None = None) -> dict:
    """Набор проверок по умолчанию; отчёт детерминирован при фиксированном seed."""
    if suite not in SUITES:
        raise DomainError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    report: dict = {"seed": seed, "suite": suite}
    failures = 0

    if suite in ("mihlin", "all"):
        scans = [mihlin_scan(r) for r in (0.5, 1.0, 2.0)]
        report["mihlin"] = [s.to_dict() for s in scans]
        failures += sum(not s.passed for s in scans)

    if suite in ("kato", "all"):
        kato = kato_convexity_check(samples=trials, seed=seed)
        report["kato"] = kato.to_dict()
        failures += len(kato.violations)

    if suite in ("bounds", "all"):
        a = bound_scan_a(
            [-1.0, -3.0, -10.0, -30.0, -100.0],
            trials=trials,
            seed=seed,
            decay_lambdas=[-1e3, -3e3, -1e4],
            workers=workers,
        )
        l1 = bound_scan_l1([10.0, 10j, -5 + 5j, 100 * np.exp(2.5j)], trials=max(trials + trials // 4, 1), seed=seed)
        u = u_positivity_scan(list(np.linspace(0.1, 2 * math.pi, 25)), list(-np.logspace(-2, 3, 25)))
        report["bounds_a"] = a.to_dict()
        report["bounds_l1"] = l1.to_dict()
        report["u_positivity"] = u.to_dict()
        failures += len(a.violations) + len(l1.violations) + len(u.violations)

    report["failures"] = failures
    report["passed"] = failures == 0
    return report
