# app/numerics/sum_inverter.py
"""
Обращение замкнутой суммы L₁,μ + L₂ контурным интегралом

    V = −(1/2πi) ∫_Γ (L₁,μ − zI)⁻¹ (L₂ + zI)⁻¹ F dz,   L₂ = −A,

где Γ обходит σ(L₁,μ) ⊂ {Re √z ≤ μ} против часовой стрелки и оставляет σ(A)
справа. Рабочий контур — ветвь гиперболы в координате w = √z:

    w(x) = μ⁺ + a(cosh x + i·tg α·sinh x),   z = w²,   α = (π − θ₀)/2,

т.е. Re w ≥ μ⁺ + a, а на бесконечности z уходит вдоль лучей e^{±i(π−θ₀)}.
Квадратура — правило средних точек по x, узлы ±(m + ½)h.
Пара лучей из точки x₀ (`ray_contour`) остаётся для матричного оракула.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg as scl
from scipy.optimize import brentq
from scipy.special import roots_legendre

from app.errors import ConfigurationError, PreconditionError, SpectralConditionError
from app.logger import get_logger
from app.numerics.grids import Field, Params, ThetaGrid, XFunction, derivative, field_norm
from app.numerics.resolvent_t import TMethod, resolve_l1
from app.numerics.resolvent_theta import ThetaMethod, resolve_a_arrays
from app.numerics.spectra import (
    OperatorSpectrum,
    RootTable,
    SpectralConstants,
    check_condition,
    operator_spectrum,
    tau_of,
)
from app.utils.parallel import ordered_map

log = get_logger("sum_inverter")

Opening = Literal["left", "right"]

Z_MAX = 1e8  # |z| на концах гиперболы; выше дискретных норм L₁ и A


@dataclass(frozen=True, eq=False)
class Contour:
    """
    kind="rays": x0 — вершина лучей, scale — масштаб r = scale·u/(1 − u).
    kind="hyperbola": √z = center + scale·(cosh x + i·tg α·sinh x), x0 — вершина на ℝ₊.
    """
    quad_nodes: np.ndarray
    quad_weights: np.ndarray
    theta0: float
    x0: float
    scale: float
    center: float = 0.0
    opening: str = "left"
    kind: str = "rays"
    R0: float = 0.0
    truncation: float = math.inf
    segments: tuple[dict, ...] = field(default=())

    @property
    def size(self) -> int:
        return int(self.quad_nodes.size)

    @property
    def half_angle(self) -> float:
        """α = (π − θ₀)/2: угол асимптот гиперболы в плоскости √z."""
        return 0.5 * (math.pi - self.theta0)

    def encloses(self, z: complex) -> bool:
        """Точка внутри области, которую контур обходит против часовой стрелки."""
        z = complex(z)
        if self.kind == "hyperbola":
            w = complex(np.sqrt(z))
            a = self.scale
            # левее ветви ((Re w − center)/a)² − (Im w/(a·tg α))² = 1
            return w.real - self.center < a * math.sqrt(1.0 + (w.imag / (a * math.tan(self.half_angle))) ** 2)
        if z == self.x0:
            return False
        angle = abs(np.angle(z - self.x0))
        if self.opening == "left":
            return angle > math.pi - self.theta0
        return angle < self.theta0

    def point_at(self, radius: np.ndarray) -> np.ndarray:
        """Точки верхней ветви с |z| = radius (для лучей |z − x₀| = radius)."""
        radius = np.atleast_1d(np.asarray(radius, dtype=float))
        if self.kind == "hyperbola":
            a, alpha = self.scale, self.half_angle
            x = np.array([_x_at_radius(r, self.center, a, alpha) for r in radius])
            return _hyperbola_w(x, self.center, a, alpha) ** 2
        angle = math.pi - self.theta0 if self.opening == "left" else self.theta0
        return self.x0 + radius * np.exp(1j * angle)

    def upper_half(self) -> np.ndarray:
        return np.nonzero(self.quad_nodes.imag > 0)[0]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "theta0": self.theta0,
            "x0": self.x0,
            "scale": self.scale,
            "center": self.center,
            "opening": self.opening,
            "truncation": self.truncation,
            "nodes": [[float(z.real), float(z.imag)] for z in self.quad_nodes],
            "weights": [[float(w.real), float(w.imag)] for w in self.quad_weights],
        }


def ray_contour(
    x0: float,
    theta0: float,
    scale: float = 1.0,
    panels: int = 8,
    nodes_per_panel: int = 16,
    opening: Opening = "left",
) -> Contour:
    """
    Два луча z = x₀ + r·d±. Для opening="left" d± = e^{±i(π−θ₀)},
    для "right" d± = e^{±iθ₀}; обход всегда против часовой стрелки
    вокруг области между лучами.
    """
    if not (0.0 < theta0 < math.pi):
        raise ConfigurationError(f"theta0 = {theta0} is not a valid opening angle")
    if panels < 1 or nodes_per_panel < 2:
        raise ConfigurationError("contour needs panels >= 1 and nodes_per_panel >= 2")

    g_nodes, g_weights = roots_legendre(nodes_per_panel)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    u = (mid[:, None] + half[:, None] * g_nodes[None, :]).ravel()
    wu = (half[:, None] * g_weights[None, :]).ravel()
    r = scale * u / (1.0 - u)
    dr = wu * scale / (1.0 - u) ** 2

    angle = math.pi - theta0 if opening == "left" else theta0
    d_up, d_low = np.exp(1j * angle), np.exp(-1j * angle)
    # left: верхний луч наружу, нижний внутрь; right: наоборот
    s_up = 1.0 if opening == "left" else -1.0

    nodes = np.concatenate([x0 + r * d_up, x0 + r * d_low])
    weights = np.concatenate([s_up * dr * d_up, -s_up * dr * d_low])
    return Contour(
        quad_nodes=nodes,
        quad_weights=weights,
        theta0=float(theta0),
        x0=float(x0),
        scale=float(scale),
        opening=opening,
        truncation=float(r.max()),
        segments=(
            {"kind": "ray", "direction": [d_up.real, d_up.imag], "orientation": "out" if s_up > 0 else "in"},
            {"kind": "ray", "direction": [d_low.real, d_low.imag], "orientation": "in" if s_up > 0 else "out"},
        ),
    )


# =========================
# Гипербола
# =========================
def _hyperbola_w(x: np.ndarray, center: float, a: float, alpha: float) -> np.ndarray:
    return center + a * (np.cosh(x) + 1j * math.tan(alpha) * np.sinh(x))


def _x_at_radius(radius: float, center: float, a: float, alpha: float) -> float:
    """x ≥ 0 с |z(x)| = radius; |w(x)| монотонно растёт по x."""
    def gap(x: float) -> float:
        return abs(complex(_hyperbola_w(np.array(x), center, a, alpha))) ** 2 - radius

    if gap(0.0) >= 0:
        return 0.0
    upper = math.asinh(math.sqrt(radius) / (a * math.tan(alpha))) + 1.0
    return float(brentq(gap, 0.0, upper, xtol=1e-12))


def semi_axis_bound(theta0: float, mu: float, eigenvalues: np.ndarray) -> float:
    """
    Наибольшая полуось a, при которой все λ_j лежат справа от гиперболы
    с центром μ⁺ = max(μ, 0): a² < (u_j − μ⁺)² − v_j²·ctg²α, √λ_j = u_j + i v_j.
    """
    lam = np.asarray(eigenvalues, dtype=complex)
    if lam.size == 0:
        return math.inf
    w = np.sqrt(lam)
    mu_plus = max(mu, 0.0)
    cot = 1.0 / math.tan(0.5 * (math.pi - theta0))
    shifted = w.real - mu_plus
    bound = shifted**2 - (w.imag * cot) ** 2
    if np.any(shifted <= 0) or np.any(bound <= 0):
        return 0.0
    return float(np.sqrt(bound.min()))


def hyperbola_contour(
    a: float,
    theta0: float,
    center: float = 0.0,
    nodes_per_branch: int = 96,
    z_max: float = Z_MAX,
) -> Contour:
    """
    √z = center + a(cosh x + i·tg α·sinh x), x ∈ (−X, X), |z(±X)| = z_max.
    Первые nodes_per_branch узлов — верхняя ветвь, остальные сопряжены.
    """
    if not (0.0 < theta0 < math.pi):
        raise ConfigurationError(f"theta0 = {theta0} is not a valid opening angle")
    if a <= 0 or center < 0:
        raise ConfigurationError(f"hyperbola needs a > 0 and center >= 0, got a = {a}, center = {center}")
    if nodes_per_branch < 2:
        raise ConfigurationError("contour needs nodes_per_branch >= 2")
    vertex = (center + a) ** 2
    if z_max <= 4.0 * vertex:
        raise ConfigurationError(f"z_max = {z_max:g} must exceed 4·(center + a)² = {4.0 * vertex:g}")

    alpha = 0.5 * (math.pi - theta0)
    x_end = _x_at_radius(z_max, center, a, alpha)
    h = x_end / nodes_per_branch
    x = (np.arange(nodes_per_branch) + 0.5) * h

    w = _hyperbola_w(x, center, a, alpha)
    dz = 2.0 * w * a * (np.sinh(x) + 1j * math.tan(alpha) * np.cosh(x)) * h
    z = w**2
    # z(−x) = conj z(x), z′(−x) = −conj z′(x)
    nodes = np.concatenate([z, z.conj()])
    weights = np.concatenate([dz, -dz.conj()])
    return Contour(
        quad_nodes=nodes,
        quad_weights=weights,
        theta0=float(theta0),
        x0=float(vertex),
        scale=float(a),
        center=float(center),
        opening="left",
        kind="hyperbola",
        truncation=float(np.abs(z).max()),
        segments=(
            {"kind": "hyperbola", "center": center, "semi_axis": a, "asymptote": math.pi - theta0,
             "x_max": x_end, "step": h},
        ),
    )


def build_contour(
    params: Params,
    consts: SpectralConstants,
    table: RootTable,
    spectrum: OperatorSpectrum | None = None,
    nodes_per_branch: int = 96,
    z_max: float = Z_MAX,
) -> Contour:
    """
    Гипербола с центром √z = max(μ, 0) и асимптотами под углом θ₀ к ℝ₋.
    Полуось a — половина semi_axis_bound: контур проходит посередине между
    прямой Re √z = μ и ближайшим собственным значением A.
    """
    if not check_condition(params.omega, params.mu, table):
        raise SpectralConditionError(
            f"ωμ = {params.omega * params.mu:.4f} >= τ = {tau_of(table):.5f}",
        )
    theta0 = consts.theta0
    if not (consts.theta_l1 < theta0 < math.pi - consts.theta_l2):
        raise ConfigurationError("no admissible theta0 for the given spectral constants")

    if spectrum is None:
        spectrum = operator_spectrum(params.omega, max(len(table), 3), params.tolerances.newton_tol)
    mu_plus = max(params.mu, 0.0)
    a_max = semi_axis_bound(theta0, params.mu, spectrum.eigenvalues)
    if a_max <= 0:
        raise SpectralConditionError(
            f"no hyperbola at θ₀ = {theta0:.3f} separates Re √z ≤ {mu_plus:.4g} from σ(A)",
            mu=mu_plus,
        )
    a = 0.5 * a_max if math.isfinite(a_max) else 1.0

    contour = hyperbola_contour(a, theta0, mu_plus, nodes_per_branch, z_max)
    log.info(
        f"🧭 Контур: центр {mu_plus:.4g}, полуось {a:.4g} (< {a_max:.4g}), θ₀ = {theta0:.3f}, узлов {contour.size}"
    )
    return contour


# =========================
# Прямой оператор A
# =========================
def apply_a(f: XFunction, grid: ThetaGrid) -> XFunction:
    """A(ψ₁, ψ₂) = (ψ₂, −(∂² + 1)²ψ₁ − 2(∂² − 1)ψ₂)."""
    if not f.in_domain:
        raise PreconditionError("apply_a needs an element flagged in D(A)")
    second = _a_second(f.psi1, f.psi2, grid, axis=0)
    return XFunction(f.psi2, second)


def _a_second(psi1: np.ndarray, psi2: np.ndarray, grid: ThetaGrid, axis: int) -> np.ndarray:
    return (
        -(derivative(psi1, grid, 4, axis=axis) + 2.0 * derivative(psi1, grid, 2, axis=axis) + psi1)
        - 2.0 * (derivative(psi2, grid, 2, axis=axis) - psi2)
    )


def apply_a_field(V: Field) -> Field:
    """A, применённый в каждом узле t."""
    return V.replace(V.psi2, _a_second(V.psi1, V.psi2, V.theta_grid, axis=1))


# =========================
# Обращение суммы
# =========================
def integrand_at(
    z: complex,
    F: Field,
    mu: float,
    eps0: float = 1.0,
    newton_tol: float = 1e-12,
    theta_method: ThetaMethod = "auto",
    t_method: TMethod = "collocation",
    residual_tol: float = 1e-6,
    check_tail: bool = True,
) -> Field:
    """(L₁,μ − z)⁻¹(L₂ + z)⁻¹F = −(L₁,μ − z)⁻¹(A − z)⁻¹F."""
    grid = F.theta_grid
    psi1, psi2 = resolve_a_arrays(z, F.psi1.T, F.psi2.T, grid, eps0, newton_tol, theta_method)
    G = F.replace(-psi1.T, -psi2.T)
    return resolve_l1(z, G, mu, method=t_method, residual_tol=residual_tol, check_tail=check_tail)


def truncation_tail(contour: Contour, t_max: float, mu: float) -> float:
    """max по узлам e^{−t_max(Re√z − μ)}: вклад отброшенного хвоста t > t_max."""
    margin = np.sqrt(contour.quad_nodes).real - mu
    return float(np.exp(-t_max * margin.min()))


def invert_sum(
    F: Field,
    contour: Contour,
    params: Params,
    consts: SpectralConstants,
    theta_method: ThetaMethod = "auto",
    t_method: TMethod = "collocation",
    workers: int | None = None,
    exploit_symmetry: bool = True,
) -> Field:
    """
    V = −(1/2πi) Σ_m w_m (L₁,μ − z_m)⁻¹(L₂ + z_m)⁻¹F.

    Для вещественного F и сопряжённо-симметричного контура считается только
    верхняя ветвь: вклад пары (z, z̄) равен 2i·Im(w·V(z)).
    """
    tol = params.tolerances
    tail = truncation_tail(contour, F.t_grid.t_max, params.mu)
    if tail >= tol.residual_tol:
        log.warning(f"⚠️ Хвост e^(-t_max(Re√z − μ)) на контуре {tail:.2e} ≥ {tol.residual_tol:.0e}")

    real_input = not np.any(F.psi1.imag) and not np.any(F.psi2.imag)
    use_half = exploit_symmetry and real_input
    indices = contour.upper_half() if use_half else np.arange(contour.size)

    def term(m: int) -> Field:
        return integrand_at(
            contour.quad_nodes[m], F, params.mu, consts.eps0, tol.newton_tol,
            theta_method, t_method, tol.residual_tol, check_tail=False,
        ) * contour.quad_weights[m]

    terms = ordered_map(term, indices, workers)

    psi1 = np.zeros_like(F.psi1)
    psi2 = np.zeros_like(F.psi2)
    for t in terms:  # фиксированный порядок суммирования
        psi1 += t.psi1
        psi2 += t.psi2

    if use_half:
        psi1 = -(psi1.imag) / math.pi + 0j
        psi2 = -(psi2.imag) / math.pi + 0j
    else:
        psi1 = -psi1 / (2j * math.pi)
        psi2 = -psi2 / (2j * math.pi)

    V = F.replace(psi1, psi2, vanishing=True)
    log.debug(f"Σ⁻¹: {len(indices)} узлов, мнимый остаток {imaginary_residue(V):.2e}")
    return V


def imaginary_residue(V: Field, p: float = 2.0) -> float:
    total = field_norm(V, p)
    return field_norm(V.imag, p) / total if total > 0 else 0.0


def integrand_decay_slope(
    F: Field,
    contour: Contour,
    params: Params,
    consts: SpectralConstants,
    radii: np.ndarray | None = None,
) -> float:
    """Наклон log‖интеграла‖ по log|z| вдоль верхней ветви контура."""
    radii = np.logspace(1.5, 3.5, 6) if radii is None else np.asarray(radii)
    zs = contour.point_at(radii)
    norms = [
        field_norm(
            integrand_at(z, F, params.mu, consts.eps0, params.tolerances.newton_tol, check_tail=False),
            params.p,
        )
        for z in zs
    ]
    slope, _ = np.polyfit(np.log(np.abs(zs)), np.log(norms), 1)
    return float(slope)


# =========================
# Матричный оракул
# =========================
def matrix_oracle(M1: np.ndarray, M2: np.ndarray, contour: Contour, commute_tol: float = 1e-10) -> np.ndarray:
    """−(1/2πi) Σ w_m (M₁ − z_m)⁻¹(M₂ + z_m)⁻¹ для коммутирующих матриц."""
    M1 = np.asarray(M1, dtype=complex)
    M2 = np.asarray(M2, dtype=complex)
    scale = max(1.0, np.linalg.norm(M1) * np.linalg.norm(M2))
    if np.linalg.norm(M1 @ M2 - M2 @ M1) > commute_tol * scale:
        raise ConfigurationError("M1 and M2 do not commute")
    if not all(contour.encloses(z) for z in np.linalg.eigvals(M1)):
        raise SpectralConditionError("σ(M1) is not enclosed by the contour")
    if any(contour.encloses(z) for z in np.linalg.eigvals(-M2)):
        raise SpectralConditionError("σ(−M2) intersects the enclosed region")

    n = M1.shape[0]
    eye = np.eye(n)
    acc = np.zeros((n, n), dtype=complex)
    for z, w in zip(contour.quad_nodes, contour.quad_weights):
        inner = scl.solve(M2 + z * eye, eye)
        acc += w * scl.solve(M1 - z * eye, inner)
    return -acc / (2j * math.pi)
