# app/numerics/resolvent_t.py
"""
Резольвента (L₁,μ − λI)⁻¹ на полуоси, L₁,μ V = V″ − 2μV′ + μ²V, V(0) = V(∞) = 0.

Явная формула: при a = μ − √λ, b = μ + √λ
    V(t) = (e^{ta} w(0) − y(t) − w(t)) / (2√λ),
    y(t) = ∫₀ᵗ e^{a(t−s)} R(s) ds,   w(t) = ∫ₜ^∞ e^{b(t−s)} R(s) ds.
y и w — решения y′ = ay + R, y(0) = 0 и w′ = bw − R, w(t_max) = 0.
L₁,μ действует только по t, поэтому все θ-столбцы решаются одной системой.
"""
from __future__ import annotations

import math
from typing import Literal

import numpy as np
import scipy.linalg as scl

from app.errors import ConfigurationError, DomainError
from app.logger import get_logger
from app.numerics.grids import Field, TGrid, derivative
from app.numerics.spectra import in_pi_mu

log = get_logger("resolvent_t")

TMethod = Literal["collocation", "formula"]


def _stack(R: Field) -> np.ndarray:
    return np.concatenate([R.psi1, R.psi2], axis=1)


def _unstack(R: Field, values: np.ndarray) -> Field:
    m = R.theta_grid.n
    return R.replace(values[:, :m], values[:, m:], vanishing=True)


def _first_order(grid: TGrid, c: complex, rhs: np.ndarray, anchor: int) -> np.ndarray:
    """y′ − c y = rhs, y(t_anchor) = 0."""
    mat = (grid.diff_matrix(1) - c * np.eye(grid.n)).astype(complex)
    mat[anchor] = 0.0
    mat[anchor, anchor] = 1.0
    rhs = np.array(rhs, dtype=complex)
    rhs[anchor] = 0.0
    return scl.solve(mat, rhs)


def _second_order(grid: TGrid, lam: complex, mu: float, rhs: np.ndarray) -> np.ndarray:
    n = grid.n
    mat = (
        grid.diff_matrix(2) - 2.0 * mu * grid.diff_matrix(1) + (mu**2 - lam) * np.eye(n)
    ).astype(complex)
    rhs = np.array(rhs, dtype=complex)
    for row in (0, n - 1):
        mat[row] = 0.0
        mat[row, row] = 1.0
        rhs[row] = 0.0
    return scl.solve(mat, rhs)


def resolve_l1(
    lam: complex,
    R: Field,
    mu: float,
    method: TMethod = "collocation",
    residual_tol: float = 1e-6,
    check_tail: bool = True,
) -> Field:
    """(L₁,μ − λI)⁻¹R для λ ∈ Π_μ. check_tail=False: хвост проверяет вызывающий (весь контур сразу)."""
    lam = complex(lam)
    if not in_pi_mu(lam, mu):
        raise DomainError(f"λ = {lam} is outside Π_μ for μ = {mu}")
    root = complex(np.sqrt(lam))
    if mu + root.real <= 0:
        raise DomainError(f"μ + Re √λ must be positive, got {mu + root.real}")

    grid = R.t_grid
    tail = math.exp(-grid.t_max * (root.real - mu))
    if check_tail and tail >= residual_tol:
        log.warning(f"⚠️ Хвост e^(-t_max(Re√λ − μ)) = {tail:.2e} при λ = {lam:.4g}")

    data = _stack(R)
    if method == "collocation":
        values = _second_order(grid, lam, mu, data)
    elif method == "formula":
        a, b = mu - root, mu + root
        y = _first_order(grid, a, data, anchor=0)
        w = _first_order(grid, b, -data, anchor=grid.n - 1)
        boundary = np.exp(grid.nodes * a)[:, None] * w[0][None, :]
        values = (boundary - y - w) / (2.0 * root)
    else:
        raise ConfigurationError(f"unknown t method {method!r}")
    return _unstack(R, values)


def apply_l1(V: Field, mu: float) -> Field:
    """L₁,μ V = V″ − 2μV′ + μ²V."""
    grid = V.t_grid
    data = _stack(V)
    out = derivative(data, grid, 2) - 2.0 * mu * derivative(data, grid, 1) + mu**2 * data
    return _unstack(V, out).replace(vanishing=False)


def l1_bound_constant(eps: float) -> float:
    """M_{L₁,μ} = 4 / sin ε."""
    return 4.0 / math.sin(eps)
