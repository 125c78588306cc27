# tests/conftest.py
import math
import os
import tempfile

# окружение до импорта app: своя база и логи во временном каталоге
_TMP = tempfile.mkdtemp(prefix="sector-solver-tests-")
os.environ["DATABASE_URL"] = f"sqlite+aiosqlite:///{_TMP}/test.db"
os.environ["SOLVER_LOG_DIR"] = os.path.join(_TMP, "logs")
os.environ.setdefault("SOLVER_WORKERS", "1")

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from app.numerics.grids import Params, make_t_grid, make_theta_grid  # noqa: E402
from app.numerics.spectra import find_roots, make_spectral_constants, operator_spectrum  # noqa: E402

HALF_PI = math.pi / 2


@pytest.fixture(scope="session")
def fadle_table():
    return find_roots(10)


@pytest.fixture(scope="session")
def quarter_spectrum():
    return operator_spectrum(HALF_PI, 10)


@pytest.fixture
def theta_grid():
    return make_theta_grid(HALF_PI, 32)


@pytest.fixture
def t_grid():
    return make_t_grid(12.0, 40)


@pytest.fixture
def quarter_params():
    return Params(omega=HALF_PI, mu=0.0, p=2.0)


@pytest.fixture
def quarter_consts(quarter_spectrum):
    return make_spectral_constants(eigenvalues=quarter_spectrum.eigenvalues)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def bump(theta, omega):
    """θ²(ω−θ)²: зажатая на обоих концах функция."""
    return theta**2 * (omega - theta) ** 2
