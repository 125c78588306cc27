import math

import numpy as np
import pytest

import app.numerics.pipeline as pipeline
from app.errors import ConfigurationError, DivergenceError, IngestionError, SpectralConditionError
from app.numerics.grids import Field, Params, Tolerances, field_norm, make_t_grid, make_theta_grid
from app.numerics.pipeline import (
    BUILTIN_RHS,
    SectorSamples,
    apply_p1,
    apply_p2,
    apply_perturbation,
    build_rhs,
    contraction_factor,
    edge_defects,
    estimate_rho0,
    interior_defect,
    plate_fd_residual,
    plate_patch,
    polar_laplacian,
    reconstruct_u,
    residual,
    run_solve,
    solve,
)
from app.numerics.resolvent_t import apply_l1
from app.numerics.spectra import make_spectral_constants
from app.numerics.sum_inverter import apply_a_field, build_contour
from tests.conftest import HALF_PI, bump

SENTINEL_CONTOUR = object()


@pytest.fixture
def identity_inverse(monkeypatch):
    """Σ⁻¹ = I: остаётся чистая итерация V ↦ F − kρ²(P₁+P₂)V."""
    monkeypatch.setattr(pipeline, "invert_sum", lambda G, *args, **kwargs: G)


def _one(x, y):
    return np.ones_like(x)


# =========================
# Возмущения
# =========================
def test_p1_annihilates_sine(theta_grid, t_grid):
    V = Field.from_function(theta_grid, t_grid, lambda t, th: np.sin(th), lambda t, th: 1.0 + 0 * t)
    out = apply_p1(V)
    assert np.all(out.psi1 == 0)
    expected = -np.exp(-2.0 * t_grid.nodes)[:, None] * np.ones(theta_grid.n)
    assert np.max(np.abs(out.psi2 - expected)) < 1e-8


def test_p2_kernel(theta_grid, t_grid):
    mu = 0.5
    om = theta_grid.omega
    V = Field.from_function(theta_grid, t_grid, lambda t, th: np.exp(mu * t) * bump(th, om), lambda t, th: 0 * t)
    out = apply_p2(V, mu)
    assert np.max(np.abs(out.psi2)) < 1e-6 * np.max(np.abs(V.psi1))


def test_perturbation_vanishes_for_zero_k(theta_grid, t_grid):
    V = Field.from_function(theta_grid, t_grid, lambda t, th: np.sin(th), lambda t, th: np.cos(th))
    out = apply_perturbation(V, Params(omega=theta_grid.omega, k=0.0))
    assert field_norm(out) == 0.0


def test_residual_of_zero_field(theta_grid, t_grid, quarter_params):
    F = build_rhs(_one, quarter_params, theta_grid, t_grid)
    assert residual(Field.zeros(theta_grid, t_grid), F, quarter_params) == pytest.approx(1.0)


# =========================
# Правая часть
# =========================
def test_build_rhs_constant(theta_grid, t_grid):
    params = Params(omega=theta_grid.omega, mu=0.0, rho=2.0)
    F = build_rhs(_one, params, theta_grid, t_grid)
    assert np.all(F.psi1 == 0)
    expected = 8.0 * np.exp(-3.0 * t_grid.nodes)[:, None] * np.ones(theta_grid.n)
    assert np.allclose(F.psi2, expected, rtol=1e-12)


def test_build_rhs_not_finite(theta_grid, t_grid, quarter_params):
    with pytest.raises(IngestionError) as info:
        build_rhs(lambda x, y: np.where(x > 0.5, np.nan, 1.0), quarter_params, theta_grid, t_grid)
    assert "r" in info.value.details


def test_build_rhs_raises_in_callable(theta_grid, t_grid, quarter_params):
    def broken(x, y):
        raise ValueError("no data")

    with pytest.raises(IngestionError):
        build_rhs(broken, quarter_params, theta_grid, t_grid)


# =========================
# Итерация Неймана
# =========================
@pytest.mark.usefixtures("identity_inverse")
def test_neumann_converges_for_small_k(theta_grid, t_grid, fadle_table):
    params = Params(omega=theta_grid.omega, k=1e-3)
    F = build_rhs(_one, params, theta_grid, t_grid)
    result = run_solve(F, params, make_spectral_constants(), fadle_table, contour=SENTINEL_CONTOUR)
    assert result.iterations >= 2
    assert result.observed_ratio <= 1e-3
    assert result.to_dict()["iterations"] == result.iterations


@pytest.mark.usefixtures("identity_inverse")
def test_neumann_diverges_for_large_k(theta_grid, t_grid, fadle_table):
    params = Params(omega=theta_grid.omega, k=10.0)
    F = build_rhs(_one, params, theta_grid, t_grid)
    with pytest.raises(DivergenceError) as info:
        run_solve(F, params, make_spectral_constants(), fadle_table, contour=SENTINEL_CONTOUR)
    corrections = info.value.details["corrections"]
    assert corrections[-1] > corrections[0]


@pytest.mark.usefixtures("identity_inverse")
def test_no_perturbation_single_pass(theta_grid, t_grid, fadle_table):
    params = Params(omega=theta_grid.omega, k=0.0)
    F = build_rhs(_one, params, theta_grid, t_grid)
    result = run_solve(F, params, make_spectral_constants(), fadle_table, contour=SENTINEL_CONTOUR)
    assert result.iterations == 1
    assert result.observed_ratio is None


def test_solve_condition_gate(theta_grid, t_grid, fadle_table):
    params = Params(omega=math.pi, mu=2.0)
    F = Field.zeros(theta_grid, t_grid)
    with pytest.raises(SpectralConditionError):
        run_solve(F, params, make_spectral_constants(), fadle_table)


def test_interior_defect_drops_boundary_rows(theta_grid, t_grid):
    D = Field.from_function(theta_grid, t_grid, lambda t, th: 1.0 + 0 * t * th, lambda t, th: 1.0 + 0 * t * th)
    inner = interior_defect(D)
    assert np.all(inner.psi1[[0, -1]] == 0) and np.all(inner.psi1[1:-1] == 1.0)
    assert np.all(inner.psi2[:, [0, 1, -2, -1]] == 0)
    assert np.all(inner.psi2[1:-1, 2:-2] == 1.0)


# =========================
# Решение с настоящим контуром
# =========================
def _manufactured_problem(params, n_theta, n_t, t_max=16.0):
    """F := L₁,μV* − AV* + kρ²(P₁+P₂)V* для гладкого зажатого V*."""
    theta_grid = make_theta_grid(params.omega, n_theta)
    t_grid = make_t_grid(t_max, n_t)
    om = params.omega
    exact = Field.from_function(
        theta_grid, t_grid,
        lambda t, th: t * np.exp(-t) * bump(th, om),
        lambda t, th: t * np.exp(-2.0 * t) * bump(th, om) * np.cos(th),
    )
    F = apply_l1(exact, params.mu) - apply_a_field(exact) + apply_perturbation(exact, params)
    return exact, F


def test_solve_linearity(fadle_table, quarter_spectrum, quarter_consts):
    params = Params(omega=HALF_PI, k=0.2, tolerances=Tolerances(neumann_tol=1e-11))
    theta_grid = make_theta_grid(HALF_PI, 12)
    t_grid = make_t_grid(12.0, 20)
    contour = build_contour(params, quarter_consts, fadle_table, quarter_spectrum, nodes_per_branch=16)
    F1 = build_rhs(BUILTIN_RHS["one"], params, theta_grid, t_grid)
    F2 = build_rhs(BUILTIN_RHS["x"], params, theta_grid, t_grid)

    V1 = solve(F1, params, quarter_consts, fadle_table, contour)
    V2 = solve(F2, params, quarter_consts, fadle_table, contour)
    V12 = solve(2.0 * F1 - 3.0 * F2, params, quarter_consts, fadle_table, contour)
    assert field_norm(V12 - (2.0 * V1 - 3.0 * V2)) < 1e-8 * field_norm(V12)


@pytest.mark.slow
def test_solve_manufactured_with_perturbation(fadle_table, quarter_spectrum, quarter_consts):
    params = Params(omega=HALF_PI, k=0.1, tolerances=Tolerances(neumann_tol=1e-10))
    exact, F = _manufactured_problem(params, 24, 48)
    contour = build_contour(params, quarter_consts, fadle_table, quarter_spectrum, nodes_per_branch=96)
    result = run_solve(F, params, quarter_consts, fadle_table, contour)
    assert result.iterations >= 2
    assert field_norm(result.V - exact) < 1e-3 * field_norm(exact)


@pytest.mark.slow
def test_residual_under_refinement(fadle_table, quarter_spectrum, quarter_consts):
    params = Params(omega=HALF_PI, k=0.1, tolerances=Tolerances(neumann_tol=1e-10))
    levels = []
    for n in (32, 64, 128):
        _, F = _manufactured_problem(params, n, n)
        contour = build_contour(params, quarter_consts, fadle_table, quarter_spectrum, nodes_per_branch=n)
        V = solve(F, params, quarter_consts, fadle_table, contour)
        levels.append(residual(V, F, params))
    assert levels[0] > levels[1] > levels[2]
    assert levels[2] <= 1e-4


@pytest.mark.slow
def test_neumann_converges_at_half_rho0(fadle_table, quarter_spectrum, quarter_consts):
    params = Params(omega=HALF_PI, k=0.1, tolerances=Tolerances(neumann_tol=1e-5))
    theta_grid = make_theta_grid(HALF_PI, 32)
    t_grid = make_t_grid(16.0, 48)
    contour = build_contour(params, quarter_consts, fadle_table, quarter_spectrum, nodes_per_branch=64)
    sample = build_rhs(BUILTIN_RHS["bump"], params, theta_grid, t_grid)
    rho0 = estimate_rho0(params, quarter_consts, fadle_table, sample, contour=contour, power_steps=2)
    assert math.isfinite(rho0)

    half = params.model_copy(update={"rho": rho0 / 2})
    F = build_rhs(BUILTIN_RHS["bump"], half, theta_grid, t_grid)
    result = run_solve(F, half, quarter_consts, fadle_table, contour)
    assert 2 <= result.iterations <= 10
    assert result.observed_ratio < 0.9


# =========================
# Оценка ρ₀
# =========================
def test_rho0_infinite_without_perturbation(theta_grid, t_grid, fadle_table):
    params = Params(omega=theta_grid.omega, k=0.0)
    sample = build_rhs(_one, params, theta_grid, t_grid)
    assert estimate_rho0(params, make_spectral_constants(), fadle_table, sample) == math.inf


def test_rho0_rejects_zero_sample(theta_grid, t_grid, fadle_table):
    params = Params(omega=theta_grid.omega, k=1.0)
    with pytest.raises(IngestionError):
        estimate_rho0(params, make_spectral_constants(), fadle_table, Field.zeros(theta_grid, t_grid))


@pytest.mark.usefixtures("identity_inverse")
def test_rho0_closed_form(theta_grid, t_grid, fadle_table):
    params = Params(omega=theta_grid.omega, k=2.0, rho=3.0)
    sample = build_rhs(_one, params, theta_grid, t_grid)
    rho0 = estimate_rho0(params, make_spectral_constants(), fadle_table, sample, contour=SENTINEL_CONTOUR)
    # P₂ = 0 при ψ₁ = 0, а P₁ сводится к −e^{−2t}ψ₂
    damped = sample.replace(None, -np.exp(-2.0 * t_grid.nodes)[:, None] * sample.psi2)
    c1 = 2.0 * field_norm(damped) / field_norm(sample)
    assert rho0 == pytest.approx(math.sqrt(0.9 / c1), rel=1e-5)
    at_rho0 = params.model_copy(update={"rho": rho0})
    assert contraction_factor(at_rho0, sample, sample) < 0.9


@pytest.mark.usefixtures("identity_inverse")
def test_rho0_power_steps_only_tighten(theta_grid, t_grid, fadle_table):
    params = Params(omega=theta_grid.omega, k=0.5)
    sample = Field.from_function(
        theta_grid, t_grid,
        lambda t, th: np.exp(-t) * np.sin(th) ** 2 * np.sin(2 * th),
        lambda t, th: np.exp(-t) * np.cos(th),
    )
    consts = make_spectral_constants()
    plain = estimate_rho0(params, consts, fadle_table, sample, contour=SENTINEL_CONTOUR)
    refined = estimate_rho0(params, consts, fadle_table, sample, contour=SENTINEL_CONTOUR, power_steps=3)
    assert 0 < refined <= plain * (1 + 1e-5)


def test_rho0_rejects_negative_power_steps(theta_grid, t_grid, fadle_table):
    params = Params(omega=theta_grid.omega, k=1.0)
    sample = build_rhs(_one, params, theta_grid, t_grid)
    with pytest.raises(ConfigurationError):
        estimate_rho0(params, make_spectral_constants(), fadle_table, sample, W=sample, power_steps=-1)


# =========================
# Восстановление u
# =========================
def test_reconstruct_zero_field(theta_grid, t_grid, quarter_params):
    samples = reconstruct_u(Field.zeros(theta_grid, t_grid), quarter_params, n_r=16)
    assert samples.u.shape == (16, theta_grid.n)
    assert not samples.mask.any()
    assert np.all(samples.u == 0)


def test_reconstruct_masks_outside_annulus(theta_grid, t_grid, quarter_params):
    samples = reconstruct_u(Field.zeros(theta_grid, t_grid), quarter_params, radii=np.array([0.5, 2.0]))
    assert not samples.mask[0].any()
    assert samples.mask[1].all()
    assert np.isnan(samples.u[1]).all()
    assert len(list(samples.rows())) == 2 * theta_grid.n


def test_polar_laplacian_of_r_squared():
    radii = np.linspace(0.5, 1.5, 101)
    thetas = np.linspace(0.0, 1.0, 41)
    u = np.repeat((radii**2)[:, None], thetas.size, axis=1)
    lap = polar_laplacian(u, radii, thetas)
    assert np.allclose(lap, 4.0, atol=1e-8)
    assert np.allclose(polar_laplacian(lap, radii, thetas), 0.0, atol=1e-6)


def test_plate_fd_residual_biharmonic_quartic():
    radii = np.linspace(0.5, 1.5, 201)
    thetas = np.linspace(0.0, 1.0, 41)
    u = np.repeat((radii**4 / 64.0)[:, None], thetas.size, axis=1)
    samples = SectorSamples(radii=radii, thetas=thetas, u=u, mask=np.zeros_like(u, dtype=bool))
    assert plate_fd_residual(samples, _one, k=0.0) < 1e-3


def test_plate_fd_residual_with_membrane_term():
    # Δ(r²) = 4, Δ²(r²) = 0: Δ²u − kΔu = −4k
    radii = np.linspace(0.5, 1.5, 101)
    thetas = np.linspace(0.0, 1.0, 21)
    u = np.repeat((radii**2)[:, None], thetas.size, axis=1)
    samples = SectorSamples(radii=radii, thetas=thetas, u=u, mask=np.zeros_like(u, dtype=bool))
    assert plate_fd_residual(samples, lambda x, y: -8.0 * np.ones_like(x), k=2.0) < 1e-6


def test_plate_fd_residual_empty_patch():
    radii = np.linspace(0.5, 1.0, 8)
    thetas = np.linspace(0.0, 1.0, 41)
    u = np.zeros((radii.size, thetas.size))
    samples = SectorSamples(radii=radii, thetas=thetas, u=u, mask=np.zeros_like(u, dtype=bool))
    with pytest.raises(IngestionError):
        plate_fd_residual(samples, _one, k=0.0)


def test_plate_fd_residual_rejects_masked(theta_grid, t_grid, quarter_params):
    samples = reconstruct_u(
        Field.zeros(theta_grid, t_grid), quarter_params,
        radii=np.linspace(1e-8, 1.0, 40), thetas=np.linspace(0.1, 1.4, 40),
    )
    assert samples.mask.any()
    with pytest.raises(IngestionError):
        plate_fd_residual(samples, _one, k=0.0)


def test_plate_patch(quarter_params):
    radii, thetas = plate_patch(quarter_params)
    assert radii[0] == pytest.approx(0.3) and radii[-1] == pytest.approx(0.9)
    assert thetas[0] == pytest.approx(0.15 * quarter_params.omega)
    assert np.allclose(np.diff(radii), radii[1] - radii[0])
    with pytest.raises(ConfigurationError):
        plate_patch(quarter_params, r_range=(0.0, 0.5))


def test_reconstruct_interpolates_between_nodes(theta_grid, quarter_params):
    t_grid = make_t_grid(12.0, 48)
    om = theta_grid.omega
    V = Field.from_function(
        theta_grid, t_grid,
        lambda t, th: np.exp(-t) * np.sin(t) * bump(th, om),
        lambda t, th: 0 * t,
    )
    radii = np.linspace(0.05, 0.95, 37)
    thetas = np.linspace(0.1, 1.4, 11)
    samples = reconstruct_u(V, quarter_params, radii=radii, thetas=thetas)
    t = np.log(1.0 / radii)[:, None]
    exact = radii[:, None] * np.exp(-t) * np.sin(t) * bump(thetas, om)[None, :]
    assert np.max(np.abs(samples.u - exact)) < 1e-8


def test_edge_defects_clamped_profile():
    radii = np.linspace(0.1, 1.0, 10)
    thetas = np.linspace(0.0, 1.0, 201)
    u = radii[:, None] * bump(thetas, 1.0)[None, :]
    samples = SectorSamples(radii=radii, thetas=thetas, u=u, mask=np.zeros_like(u, dtype=bool))
    defects = edge_defects(samples)
    assert defects["u_edge"] == 0.0
    assert defects["du_dn_edge"] < 1e-3
