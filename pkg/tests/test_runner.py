import math

import numpy as np
import pytest

from app.config import SolverConfig
from app.errors import IngestionError
from app.runner import prepare, resolve_rhs, solve_sector
from tests.conftest import HALF_PI


def _config(**overrides) -> SolverConfig:
    return SolverConfig.model_validate({"schema": 1, "omega": HALF_PI, **overrides})


def test_prepare_default_weight():
    setup = prepare(_config(p=2.0, k=0.1))
    assert setup.params.mu == 2.0
    assert setup.contour.kind == "hyperbola"
    assert setup.contour.center == 2.0


def test_resolve_rhs_unknown_builtin():
    with pytest.raises(IngestionError):
        resolve_rhs("builtin:nope")


@pytest.mark.slow
def test_solve_sector_default_config_positive_weight():
    # μ = ν = 2 при p = 2; ωμ = π < τ
    outcome = solve_sector(_config(k=0.1, p=2.0), "builtin:bump", workers=1)
    report = outcome.report
    assert report["mu"] == 2.0
    assert math.isfinite(report["rho0"]) and report["rho0"] > 0
    assert report["residual"] < 1e-2


@pytest.mark.slow
def test_solve_sector_round_trip_positive_weight():
    config = _config(
        k=0.1, p=2.0,
        grid={"n_theta": 48, "n_t": 96, "t_max": 40.0},
        contour={"nodes_per_branch": 128},
    )
    outcome = solve_sector(config, "builtin:bump", workers=1)
    report = outcome.report
    scale = np.nanmax(np.abs(outcome.samples.u))
    assert scale > 0
    assert report["edges"]["u_edge"] <= 1e-4 * scale
    assert report["edges"]["du_dn_edge"] <= 1e-4 * scale
    assert report["plate_fd_residual"] <= 1e-3
