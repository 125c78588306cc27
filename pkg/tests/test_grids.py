import math

import numpy as np
import pytest
from scipy.integrate import quad

from app.errors import ConfigurationError, DomainError, TruncationError
from app.numerics.grids import (
    Field,
    XFunction,
    derivative,
    field_norm,
    kernel_convolution,
    lp_norm,
    make_t_grid,
    make_theta_grid,
    x_norm,
)
from tests.conftest import bump


# =========================
# Сетки
# =========================
def test_theta_grid_endpoints_and_weights():
    grid = make_theta_grid(math.pi, 9)
    assert grid.nodes[0] == 0.0
    assert grid.nodes[8] == math.pi
    assert grid.weights.sum() == pytest.approx(math.pi, abs=1e-12)


def test_theta_grid_weight_sum_fine():
    grid = make_theta_grid(math.pi / 2, 64)
    assert grid.weights.sum() == pytest.approx(math.pi / 2, abs=1e-10)


def test_theta_grid_omega_bound():
    make_theta_grid(2 * math.pi, 8)
    with pytest.raises(ConfigurationError):
        make_theta_grid(2 * math.pi + 0.1, 8)


def test_theta_grid_too_few_nodes():
    with pytest.raises(ConfigurationError):
        make_theta_grid(1.0, 4)


def test_t_grid_uniform():
    grid = make_t_grid(10.0, 64, "uniform")
    assert grid.n == 64
    assert grid.nodes[0] == 0.0 and grid.nodes[-1] == 10.0
    assert np.all(np.diff(grid.nodes) > 0)


@pytest.mark.parametrize("grading", ["uniform", "exponential"])
def test_t_grid_truncation(grading):
    with pytest.raises(TruncationError):
        make_t_grid(5.0, 8, grading, residual_tol=1e-6)


def test_t_grid_exponential_clusters_at_zero():
    grid = make_t_grid(20.0, 128, "exponential")
    steps = np.diff(grid.nodes)
    assert steps[0] < steps[-1]
    # ∫₀^20 e^{−t} dt
    assert grid.integrate(np.exp(-grid.nodes)) == pytest.approx(1.0 - math.exp(-20.0), rel=1e-10)


# =========================
# Производные
# =========================
def test_derivative_of_sine():
    grid = make_theta_grid(math.pi, 64)
    assert np.max(np.abs(derivative(np.sin(grid.nodes), grid, 1) - np.cos(grid.nodes))) < 1e-6


@pytest.mark.parametrize("order, tol", [(1, 1e-10), (2, 1e-8), (3, 1e-6), (4, 1e-4)])
def test_derivative_of_constant(order, tol):
    # округление растёт как n^{2·order}
    grid = make_theta_grid(1.3, 16)
    assert np.max(np.abs(derivative(np.full(grid.n, 2.5), grid, order))) < tol


def test_fourth_derivative_of_quartic():
    grid = make_theta_grid(math.pi / 2, 16)
    d4 = derivative(bump(grid.nodes, grid.omega), grid, 4)
    assert np.allclose(d4, 24.0, atol=1e-4)


def test_derivative_along_axis():
    grid = make_theta_grid(math.pi, 32)
    rows = np.vstack([np.sin(grid.nodes), 2 * np.sin(grid.nodes)])
    d = derivative(rows, grid, 1, axis=1)
    assert np.allclose(d[1], 2 * np.cos(grid.nodes), atol=1e-8)


def test_derivative_order_out_of_range():
    grid = make_theta_grid(1.0, 16)
    with pytest.raises(ConfigurationError):
        derivative(grid.nodes, grid, 5)


# =========================
# Нормы
# =========================
def test_x_norm_constant_second_component():
    grid = make_theta_grid(math.pi, 32)
    f = XFunction(np.zeros(grid.n), np.ones(grid.n))
    assert x_norm(f, grid) == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_x_norm_zero():
    grid = make_theta_grid(math.pi, 16)
    assert x_norm(XFunction.zeros(grid.n), grid) == 0.0


def test_x_norm_sine():
    grid = make_theta_grid(math.pi, 48)
    f = XFunction(np.sin(grid.nodes), np.zeros(grid.n))
    assert x_norm(f, grid) == pytest.approx(3.0 * math.sqrt(math.pi / 2), rel=1e-7)


def test_lp_norm_p4():
    grid = make_theta_grid(1.0, 32)
    # (∫₀¹ θ⁴ dθ)^{1/4} = 5^{−1/4}
    assert float(lp_norm(grid.nodes, grid, 4.0)) == pytest.approx(5 ** -0.25, rel=1e-10)


def test_field_norm_zero():
    V = Field.zeros(make_theta_grid(1.0, 16), make_t_grid(10.0, 24))
    assert field_norm(V) == 0.0


def test_field_norm_exponential_decay():
    theta_grid = make_theta_grid(math.pi, 24)
    t_grid = make_t_grid(16.0, 96)
    V = Field.from_function(theta_grid, t_grid, lambda t, th: 0 * t, lambda t, th: np.exp(-t))
    assert field_norm(V) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-8)


def test_field_shape_mismatch():
    theta_grid = make_theta_grid(1.0, 16)
    t_grid = make_t_grid(10.0, 24)
    with pytest.raises(ConfigurationError):
        Field(theta_grid, t_grid, np.zeros((3, 3)), np.zeros((24, 16)))


def test_endpoint_norms():
    theta_grid = make_theta_grid(math.pi, 24)
    t_grid = make_t_grid(16.0, 32)
    V = Field.from_function(theta_grid, t_grid, lambda t, th: 0 * t, lambda t, th: np.exp(-t))
    at_zero, at_end = V.endpoint_norms()
    assert at_zero == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    assert at_end == pytest.approx(math.exp(-16.0) * math.sqrt(math.pi), rel=1e-8)


# =========================
# Свёртка с ядром
# =========================
def test_kernel_convolution_zero():
    grid = make_theta_grid(1.0, 16)
    assert np.all(kernel_convolution(1.5, np.zeros(grid.n), grid) == 0)


def test_kernel_convolution_constant():
    grid = make_theta_grid(1.0, 32)
    alpha = 2.0 + 0.5j
    K = kernel_convolution(alpha, np.ones(grid.n), grid)
    x = grid.nodes
    exact = (2.0 - np.exp(-alpha * x) - np.exp(-alpha * (1.0 - x))) / alpha
    assert np.max(np.abs(K - exact)) < 1e-10


def test_kernel_convolution_matches_quadrature():
    grid = make_theta_grid(1.2, 40)
    alpha = 3.0 - 1.0j
    K = kernel_convolution(alpha, np.cos(2 * grid.nodes), grid)
    x = float(grid.nodes[17])

    def integrand(s):
        return np.exp(-abs(x - s) * alpha) * np.cos(2 * s)

    left, _ = quad(integrand, 0.0, x, complex_func=True, epsabs=1e-13)
    right, _ = quad(integrand, x, 1.2, complex_func=True, epsabs=1e-13)
    assert abs(K[17] - (left + right)) < 1e-9


def test_kernel_convolution_domain():
    grid = make_theta_grid(1.0, 16)
    with pytest.raises(DomainError):
        kernel_convolution(-1.0 + 2j, np.ones(grid.n), grid)


@pytest.mark.parametrize("alpha", [1.5, 2.0 + 0.5j, 6.0 - 3.0j])
def test_kernel_convolution_of_second_derivative(alpha):
    # для зажатой f: K(f) = (2/α)f + (1/α²)K(f″)
    grid = make_theta_grid(1.3, 48)
    f = bump(grid.nodes, grid.omega) * np.cos(grid.nodes)
    K = kernel_convolution(alpha, f, grid)
    Kpp = kernel_convolution(alpha, derivative(f, grid, 2), grid)
    defect = K - (2.0 / alpha) * f - Kpp / alpha**2
    assert np.max(np.abs(defect)) < 1e-9 * np.max(np.abs(K))


# =========================
# Свойства норм
# =========================
@pytest.mark.parametrize("p", [2.0, 4.0])
def test_x_norm_homogeneity_and_triangle(rng, p):
    grid = make_theta_grid(math.pi / 2, 24)
    for _ in range(20):
        f = XFunction(rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n), rng.normal(size=grid.n))
        g = XFunction(rng.normal(size=grid.n), rng.normal(size=grid.n) - 1j * rng.normal(size=grid.n))
        c = complex(rng.normal(), rng.normal())
        assert x_norm(c * f, grid, p) == pytest.approx(abs(c) * x_norm(f, grid, p), rel=1e-12)
        assert x_norm(f + g, grid, p) <= (x_norm(f, grid, p) + x_norm(g, grid, p)) * (1 + 1e-12)


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_field_norm_homogeneity_and_triangle(rng, p):
    theta_grid = make_theta_grid(1.0, 12)
    t_grid = make_t_grid(10.0, 16)
    shape = (t_grid.n, theta_grid.n)
    for _ in range(20):
        V = Field(theta_grid, t_grid, rng.normal(size=shape), rng.normal(size=shape))
        W = Field(theta_grid, t_grid, rng.normal(size=shape), rng.normal(size=shape) * 1j)
        c = complex(rng.normal(), rng.normal())
        assert field_norm(c * V, p) == pytest.approx(abs(c) * field_norm(V, p), rel=1e-12)
        assert field_norm(V + W, p) <= (field_norm(V, p) + field_norm(W, p)) * (1 + 1e-12)
