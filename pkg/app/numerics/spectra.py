# app/numerics/spectra.py
"""
Корни sinh z = ±κz в правой полуплоскости, порог τ и спектральные области.

κ = 1 — классические корни Фадля (порог τ ≈ 4.21239, условие ωμ < τ).
κ = sin ω / ω — точные собственные значения θ-оператора A на угле ω:
U₁ = 2e^{−z}(sinh z − κz), U₂ = 2e^{−z}(sinh z + κz) при z = ω√(−λ).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import brentq, newton

from app.errors import ConfigurationError, DomainError, RegionTooSmallError
from app.logger import get_logger
from app.numerics.grids import Params

log = get_logger("spectra")

BRANCH_PLUS = "sinh+z"    # sinh z + κz = 0
BRANCH_MINUS = "sinh-z"   # sinh z − κz = 0

LEFT_EDGE = 0.05          # z = 0 и корни на мнимой оси вне прямоугольника
SEED_STEP = 0.5
MAX_GROWTH = 12


@dataclass(frozen=True, eq=False)
class RootTable:
    """Корни с Im z > 0, отсортированные по модулю."""
    roots: np.ndarray
    branch_tags: tuple[str, ...]
    kappa: float = 1.0
    residuals: np.ndarray = field(default=None, repr=False)
    winding_total: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "roots", np.asarray(self.roots, dtype=complex))
        if self.residuals is None:
            object.__setattr__(self, "residuals", branch_residuals(self.roots, self.branch_tags, self.kappa))

    def __len__(self) -> int:
        return int(self.roots.size)

    @property
    def tau(self) -> float:
        return tau_of(self)

    def to_records(self) -> list[dict]:
        return [
            {"re": float(z.real), "im": float(z.imag), "branch": tag, "residual": float(res)}
            for z, tag, res in zip(self.roots, self.branch_tags, self.residuals)
        ]


class SpectralConstants(BaseModel):
    """Углы ε_{L₁,μ}, ε_{L₂}, радиус ε₀ и угол контура θ₀."""
    model_config = ConfigDict(frozen=True)

    eps_l1: float = Field(0.1, gt=0)
    eps_l2: float = Field(0.3, gt=0)
    eps0: float = Field(1.0, gt=0)
    theta0_override: float | None = Field(None, gt=0)

    @model_validator(mode="after")
    def _check_angles(self):
        if self.theta_l1 + self.theta_l2 >= math.pi:
            raise ValueError("theta_l1 + theta_l2 must be < π (needs eps_l2 > 2·eps_l1)")
        if self.theta0_override is not None and not (self.theta_l1 < self.theta0_override < math.pi - self.theta_l2):
            raise ValueError("theta0 must lie strictly between theta_l1 and π − theta_l2")
        return self

    @property
    def theta_l1(self) -> float:
        return 2.0 * self.eps_l1

    @property
    def theta_l2(self) -> float:
        return math.pi - self.eps_l2

    @property
    def theta0(self) -> float:
        if self.theta0_override is not None:
            return self.theta0_override
        return 0.5 * (self.theta_l1 + math.pi - self.theta_l2)


def make_spectral_constants(
    eps_l1: float = 0.1,
    eps_l2: float = 0.3,
    eps0: float | None = None,
    eigenvalues: np.ndarray | None = None,
    theta0: float | None = None,
) -> SpectralConstants:
    """ε₀ по умолчанию: половина расстояния от 0 до ближайшего собственного значения, не больше 1."""
    if eps0 is None:
        eps0 = 1.0
        if eigenvalues is not None and len(eigenvalues):
            eps0 = min(1.0, 0.5 * float(np.min(np.abs(eigenvalues))))
    try:
        return SpectralConstants(eps_l1=eps_l1, eps_l2=eps_l2, eps0=eps0, theta0_override=theta0)
    except ValueError as e:
        raise ConfigurationError(f"inconsistent spectral constants: {e}") from e


# =========================
# Функции ветвей
# =========================
def _g(z, sign: int, kappa: float):
    return np.sinh(z) + sign * kappa * z


def _dg(z, sign: int, kappa: float):
    return np.cosh(z) + sign * kappa


def _sign_of(tag: str) -> int:
    return 1 if tag == BRANCH_PLUS else -1


def branch_residuals(roots: np.ndarray, tags, kappa: float = 1.0) -> np.ndarray:
    return np.array([abs(_g(z, _sign_of(t), kappa)) for z, t in zip(roots, tags)], dtype=float)


# =========================
# Принцип аргумента
# =========================
def _edge_winding(f, a: complex, b: complex, n0: int = 256, max_n: int = 1 << 16) -> float:
    """Приращение arg f вдоль отрезка [a, b] (в оборотах), с адаптивным сгущением."""
    n = n0
    while True:
        s = np.linspace(0.0, 1.0, n)
        phase = np.unwrap(np.angle(f(a + (b - a) * s)))
        if np.max(np.abs(np.diff(phase))) < 0.5 or n >= max_n:
            return float(phase[-1] - phase[0]) / (2.0 * math.pi)
        n *= 2


def box_winding(f, x0: float, x1: float, y0: float, y1: float) -> int:
    """Число нулей f внутри прямоугольника [x0, x1] × [y0, y1]."""
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    total = sum(_edge_winding(f, corners[i], corners[(i + 1) % 4]) for i in range(4))
    return int(round(total))


# =========================
# Поиск корней
# =========================
def _newton_from_seeds(seeds: np.ndarray, sign: int, kappa: float, iters: int = 80) -> np.ndarray:
    z = seeds.astype(complex).copy()
    with np.errstate(all="ignore"):
        for _ in range(iters):
            step = _g(z, sign, kappa) / _dg(z, sign, kappa)
            z = z - step
            z[~np.isfinite(z) | (np.abs(z) > 1e4)] = np.nan
    return z


def _dedupe(candidates: list[tuple[complex, str]], tol: float = 1e-7) -> list[tuple[complex, str]]:
    out: list[tuple[complex, str]] = []
    for z, tag in sorted(candidates, key=lambda c: abs(c[0])):
        if all(abs(z - w) > tol * max(1.0, abs(z)) for w, _ in out):
            out.append((z, tag))
    return out


def _roots_in_box(kappa: float, x1: float, y1: float, newton_tol: float) -> list[tuple[complex, str]]:
    xs = np.arange(LEFT_EDGE, x1 + SEED_STEP, SEED_STEP)
    ys = np.arange(SEED_STEP / 2, y1 + SEED_STEP, SEED_STEP)
    seeds = (xs[:, None] + 1j * ys[None, :]).ravel()

    found: list[tuple[complex, str]] = []
    for tag in (BRANCH_PLUS, BRANCH_MINUS):
        sign = _sign_of(tag)
        for z in _newton_from_seeds(seeds, sign, kappa):
            if not np.isfinite(z) or not (LEFT_EDGE < z.real < x1 and 0 < z.imag < y1):
                continue
            # полировка scipy-ньютоном (комплексная арифметика)
            z = complex(newton(lambda w: _g(w, sign, kappa), z, fprime=lambda w: _dg(w, sign, kappa),
                               tol=1e-15, rtol=1e-15, maxiter=50, disp=False))
            if abs(_g(z, sign, kappa)) < newton_tol * max(1.0, abs(z)):
                found.append((z, tag))
    return _dedupe(found)


def find_roots(count: int, kappa: float = 1.0, newton_tol: float = 1e-12) -> RootTable:
    """
    `count` корней (sinh z + κz)(sinh z − κz) = 0 наименьшего модуля с Im z > 0.

    Область [δ, X] × [0, Y] растёт геометрически, пока в круге |z| ≤ Y
    не окажется `count` корней. Полное число корней в прямоугольнике
    сверяется с числом оборотов f = sinh²z − κ²z² по его границе.
    """
    if count < 1:
        raise ConfigurationError(f"count must be >= 1, got {count}")
    kappa = abs(float(kappa))
    if kappa < 1e-14:
        raise RegionTooSmallError("kappa = 0: no roots off the imaginary axis")

    def f(z):
        return np.sinh(z) ** 2 - (kappa * z) ** 2

    y1 = 3.5 * count + 4.0
    x1 = math.log(4.0 * y1 / min(kappa, 1.0)) + 2.0
    for _ in range(MAX_GROWTH):
        roots = _roots_in_box(kappa, x1, y1, newton_tol)
        winding = box_winding(f, LEFT_EDGE, x1, 0.0, y1)
        if winding != len(roots):
            log.warning(f"⚠️ Аудит: оборотов {winding}, корней {len(roots)}; расширяем область")
        else:
            # при Im z < Y все корни лежат левее X (Re z ~ ln(2|z|/κ))
            radius = y1
            inside = [r for r in roots if abs(r[0]) <= radius]
            if len(inside) >= count:
                chosen = inside[:count]
                log.info(f"✅ Найдено {count} корней (κ = {kappa:.6g}), X = {x1:.2f}, Y = {y1:.2f}")
                return RootTable(
                    roots=np.array([z for z, _ in chosen]),
                    branch_tags=tuple(t for _, t in chosen),
                    kappa=kappa,
                    winding_total=winding,
                )
        x1 *= 1.5
        y1 *= 1.5

    raise RegionTooSmallError(f"could not isolate {count} roots", x_max=x1, y_max=y1)


def tau_of(table: RootTable) -> float:
    """
    min |Im z_j| по вычисленному префиксу таблицы. |Im z_j| растёт с номером,
    поэтому префикс достаточен; минимум проверяется, а не предполагается.
    """
    if len(table) == 0:
        raise ConfigurationError("empty root table")
    return float(np.min(np.abs(table.roots.imag)))


def eigenvalues_of_minus_l2(table: RootTable, omega: float) -> np.ndarray:
    """λ_j = −z_j²/ω²; точки на [0, +∞) отбрасываются."""
    lam = -(table.roots**2) / omega**2
    on_positive_axis = (np.abs(lam.imag) <= 1e-12 * np.maximum(1.0, np.abs(lam))) & (lam.real >= 0)
    return lam[~on_positive_axis]


# =========================
# Точный спектр A на угле ω
# =========================
@dataclass(frozen=True, eq=False)
class OperatorSpectrum:
    omega: float
    kappa: float
    complex_roots: RootTable | None
    axis_roots: np.ndarray

    @property
    def complex_eigenvalues(self) -> np.ndarray:
        """−z²/ω² для корней с Im z > 0 (сопряжённые значения тоже в спектре)."""
        if self.complex_roots is None:
            return np.zeros(0, dtype=complex)
        return -(self.complex_roots.roots**2) / self.omega**2

    @property
    def eigenvalues(self) -> np.ndarray:
        lam = self.complex_eigenvalues
        real_positive = (self.axis_roots / self.omega) ** 2
        allv = np.concatenate([lam, lam.conj(), real_positive.astype(complex)])
        return allv[np.argsort(np.abs(allv), kind="stable")]


def _axis_roots(kappa: float, omega: float, y_max: float) -> np.ndarray:
    """y > 0 с sin y = ±κy, кроме y = ω (вырожденный корень U₁, не собственное значение)."""
    ys = np.linspace(1e-3, y_max, int(200 * y_max) + 2)
    out = []
    for sign in (1.0, -1.0):
        h = np.sin(ys) - sign * kappa * ys
        for i in np.nonzero(np.sign(h[:-1]) * np.sign(h[1:]) < 0)[0]:
            y = brentq(lambda s: math.sin(s) - sign * kappa * s, ys[i], ys[i + 1], xtol=1e-14)
            if abs(y - omega) > 1e-8:
                out.append(y)
    return np.unique(np.round(np.array(out), 12))


def operator_spectrum(omega: float, count: int, newton_tol: float = 1e-12) -> OperatorSpectrum:
    """Собственные значения A: комплексные из sinh z = ±κz и вещественные положительные."""
    if not (0.0 < omega <= 2 * math.pi + 1e-15):
        raise ConfigurationError(f"omega must lie in (0, 2π], got {omega}")
    kappa = math.sin(omega) / omega
    table = None
    if abs(kappa) > 1e-14:
        table = find_roots(count, kappa=kappa, newton_tol=newton_tol)
        # при κ < 0 ветви меняются местами
        if kappa < 0:
            swapped = tuple(BRANCH_MINUS if t == BRANCH_PLUS else BRANCH_PLUS for t in table.branch_tags)
            table = RootTable(roots=table.roots, branch_tags=swapped, kappa=kappa, winding_total=table.winding_total)
    y_max = max(1.0 / max(abs(kappa), 1e-3), (count + 1) * math.pi)
    if abs(kappa) > 1e-14:
        y_max = min(y_max, 1.0 / abs(kappa) + 1.0)
    axis = _axis_roots(abs(kappa), omega, y_max)
    return OperatorSpectrum(omega=omega, kappa=kappa, complex_roots=table, axis_roots=axis[:count])


# =========================
# Условия и области
# =========================
def check_condition(omega: float, mu: float, table: RootTable) -> bool:
    """ωμ < τ; при μ ≤ 0 всегда выполнено."""
    if mu <= 0:
        return True
    return omega * mu < tau_of(table)


def in_pi_mu(z: complex, mu: float) -> bool:
    """Re √z > μ через критерий параболы y² + 4μ²x − 4μ⁴ > 0."""
    z = complex(z)
    if z.imag == 0 and z.real < 0:
        raise DomainError(f"z = {z} lies on the branch cut ℝ₋")
    if mu < 0:
        return True
    x, y = z.real, z.imag
    return x > mu**2 or y**2 + 4 * mu**2 * x - 4 * mu**4 > 0


def in_sigma_l1(lam: complex, mu: float, consts: SpectralConstants) -> bool:
    """Σ_{L₁,μ}: |arg λ| ≤ π − 2ε, |λ| ≥ 4μ²/sin²ε и λ ∈ Π_μ."""
    lam = complex(lam)
    eps = consts.eps_l1
    if abs(np.angle(lam)) > math.pi - 2 * eps:
        return False
    if abs(lam) < 4 * mu**2 / math.sin(eps) ** 2:
        return False
    return in_pi_mu(lam, mu)


@dataclass(frozen=True)
class SeparationReport:
    eigenvalues: np.ndarray
    distances: np.ndarray
    min_distance: float
    separated: bool
    flagged: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "min_distance": self.min_distance,
            "separated": self.separated,
            "flagged": list(self.flagged),
            "eigenvalues": [[float(v.real), float(v.imag)] for v in self.eigenvalues],
            "distances": [float(d) for d in self.distances],
        }


def separation_report(
    params: Params,
    table: RootTable,
    consts: SpectralConstants | None = None,
    eigenvalues: np.ndarray | None = None,
) -> SeparationReport:
    """
    Запас Re√λ_j − max(μ, 0) каждого собственного значения до замыкания
    σ(L₁,μ) = {Re √λ ≤ μ}. Для λ_j = −z_j²/ω² это |Im z_j|/ω − max(μ, 0).
    """
    lam = eigenvalues_of_minus_l2(table, params.omega) if eigenvalues is None else np.asarray(eigenvalues)
    distances = np.sqrt(lam.astype(complex)).real - max(params.mu, 0.0)
    flagged = tuple(int(i) for i in np.nonzero(distances <= 0)[0])
    min_distance = float(distances.min()) if distances.size else math.inf
    return SeparationReport(
        eigenvalues=lam,
        distances=distances,
        min_distance=min_distance,
        separated=min_distance > 0,
        flagged=flagged,
    )
