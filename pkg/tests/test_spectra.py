import math

import numpy as np
import pytest

from app.errors import ConfigurationError, DomainError, RegionTooSmallError
from app.numerics.grids import Params
from app.numerics.resolvent_theta import u_values
from app.numerics.spectra import (
    BRANCH_MINUS,
    BRANCH_PLUS,
    RootTable,
    SpectralConstants,
    check_condition,
    eigenvalues_of_minus_l2,
    find_roots,
    in_pi_mu,
    in_sigma_l1,
    make_spectral_constants,
    operator_spectrum,
    separation_report,
    tau_of,
)

TAU = 4.21239


# =========================
# Корни Фадля
# =========================
def test_first_root_sets_tau():
    table = find_roots(1)
    assert len(table) == 1
    assert abs(table.roots[0].imag) == pytest.approx(TAU, abs=1e-4)
    assert table.branch_tags[0] == BRANCH_MINUS


def test_tau_from_ten_roots(fadle_table):
    assert fadle_table.tau == pytest.approx(TAU, abs=1e-4)
    assert tau_of(fadle_table) == pytest.approx(abs(fadle_table.roots[0].imag))


def test_roots_are_sorted_and_refined(fadle_table):
    moduli = np.abs(fadle_table.roots)
    assert np.all(np.diff(moduli) > 0)
    assert np.all(fadle_table.roots.imag > 0)
    assert np.all(fadle_table.residuals < 1e-10 * np.maximum(1.0, moduli))
    assert set(fadle_table.branch_tags) == {BRANCH_PLUS, BRANCH_MINUS}


def test_winding_audit_covers_table(fadle_table):
    assert fadle_table.winding_total >= len(fadle_table)


def test_to_records(fadle_table):
    rec = fadle_table.to_records()[0]
    assert set(rec) == {"re", "im", "branch", "residual"}
    assert rec["im"] == pytest.approx(TAU, abs=1e-4)


def test_find_roots_rejects_zero_count():
    with pytest.raises(ConfigurationError):
        find_roots(0)


def test_find_roots_zero_kappa():
    with pytest.raises(RegionTooSmallError):
        find_roots(3, kappa=0.0)


def test_tau_synthetic():
    table = RootTable(roots=np.array([1 + 2j]), branch_tags=(BRANCH_PLUS,))
    assert tau_of(table) == 2.0


def test_tau_empty_table():
    with pytest.raises(ConfigurationError):
        tau_of(RootTable(roots=np.zeros(0, dtype=complex), branch_tags=()))


# =========================
# Собственные значения
# =========================
def test_positive_axis_filtered():
    omega = 1.3
    table = RootTable(roots=np.array([1j * omega]), branch_tags=(BRANCH_PLUS,))
    assert eigenvalues_of_minus_l2(table, omega).size == 0


def test_eigenvalue_formula(fadle_table):
    lam = eigenvalues_of_minus_l2(fadle_table, math.pi)
    z1 = fadle_table.roots[0]
    assert lam[0] == pytest.approx(-(z1**2) / math.pi**2)


def test_operator_spectrum_zeroes_u(quarter_spectrum):
    omega = quarter_spectrum.omega
    for lam in quarter_spectrum.eigenvalues[:5]:
        at = min(abs(u) for u in u_values(lam, omega))
        near = min(abs(u) for u in u_values(lam * 1.1, omega))
        assert at < 1e-6 * near


def test_operator_spectrum_straight_angle():
    # sin π = 0: U = 1 − e^{−2πs}, собственные значения k², k ≥ 2
    spectrum = operator_spectrum(math.pi, 4)
    assert spectrum.complex_roots is None
    assert np.allclose(np.sort(spectrum.eigenvalues.real), [4.0, 9.0, 16.0, 25.0], atol=1e-8)


# =========================
# Условие и области
# =========================
@pytest.mark.parametrize(
    "omega, mu, expected",
    [
        (math.pi, 1.0, True),
        (2 * math.pi, 3.0, False),
        (1.0, 0.0, True),
        (2 * math.pi, -5.0, True),
    ],
)
def test_check_condition(fadle_table, omega, mu, expected):
    assert check_condition(omega, mu, fadle_table) is expected


@pytest.mark.parametrize(
    "z, mu, expected",
    [
        (4.0, 1.0, True),
        (1.0, 1.0, False),
        (0.5 + 3j, 1.0, True),
        (-3 + 0.1j, 1.0, False),
        (-3 + 1j, 0.0, True),
    ],
)
def test_in_pi_mu(z, mu, expected):
    assert in_pi_mu(z, mu) is expected


def test_in_pi_mu_branch_cut():
    with pytest.raises(DomainError):
        in_pi_mu(-2.0, 1.0)


def test_in_sigma_l1():
    consts = SpectralConstants()
    mu, eps = 1.0, consts.eps_l1
    floor = 4 * mu**2 / math.sin(eps) ** 2
    assert in_sigma_l1(1 + floor, mu, consts)
    assert not in_sigma_l1(-1 + 1e-9j, mu, consts)
    assert not in_sigma_l1(0.5 * floor, mu, consts)


def test_spectral_constants_defaults():
    consts = make_spectral_constants()
    assert consts.theta_l1 == pytest.approx(0.2)
    assert math.pi - consts.theta_l2 == pytest.approx(0.3)
    assert consts.theta0 == pytest.approx(0.25)


def test_spectral_constants_inconsistent():
    with pytest.raises(ConfigurationError):
        make_spectral_constants(eps_l1=0.2, eps_l2=0.3)


def test_eps0_from_eigenvalues(quarter_spectrum):
    consts = make_spectral_constants(eigenvalues=quarter_spectrum.eigenvalues)
    nearest = float(np.min(np.abs(quarter_spectrum.eigenvalues)))
    assert consts.eps0 == pytest.approx(min(1.0, nearest / 2))


# =========================
# Разделение спектров
# =========================
def test_separation_mu_zero(fadle_table):
    omega = math.pi / 2
    report = separation_report(Params(omega=omega, mu=0.0), fadle_table)
    assert report.separated
    assert np.allclose(report.distances, np.abs(fadle_table.roots.imag) / omega)


def test_separation_violated(fadle_table):
    report = separation_report(Params(omega=math.pi, mu=2.0), fadle_table)
    assert not report.separated
    assert 0 in report.flagged
    assert report.to_dict()["min_distance"] <= 0


@pytest.mark.parametrize("mu", [0.0, 0.5, 2.0])
def test_in_pi_mu_matches_square_root(rng, mu):
    z = rng.uniform(-50.0, 50.0, 10_000) + 1j * rng.uniform(-50.0, 50.0, 10_000)
    direct = np.sqrt(z).real > mu
    # точки у самой параболы отбрасываются: там решает округление
    away = np.abs(np.sqrt(z).real - mu) > 1e-9
    got = np.array([in_pi_mu(w, mu) for w in z])
    assert np.array_equal(got[away], direct[away])
    assert away.sum() > 9_900
