# app/runner.py
"""
Сборка решателя из SolverConfig и готовые сценарии (решение, проверки),
общие для CLI и фоновых задач Celery.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from app.config import SolverConfig
from app.errors import IngestionError
from app.logger import get_logger
from app.numerics.checks import run_verification
from app.numerics.grids import Params, TGrid, ThetaGrid, Tolerances, make_t_grid, make_theta_grid
from app.numerics.pipeline import (
    BUILTIN_RHS,
    SectorFunction,
    SectorSamples,
    SolveResult,
    build_rhs,
    contraction_factor,
    edge_defects,
    estimate_rho0,
    plate_fd_residual,
    plate_patch,
    reconstruct_u,
    residual,
    run_solve,
)
from app.numerics.serialization import read_rhs_csv
from app.numerics.spectra import (
    OperatorSpectrum,
    RootTable,
    SpectralConstants,
    find_roots,
    make_spectral_constants,
    operator_spectrum,
)
from app.numerics.sum_inverter import Contour, build_contour, imaginary_residue, invert_sum

log = get_logger("runner")

BUILTIN_PREFIX = "builtin:"


@dataclass(eq=False)
class SolverSetup:
    config: SolverConfig
    params: Params
    table: RootTable
    spectrum: OperatorSpectrum
    consts: SpectralConstants
    theta_grid: ThetaGrid
    t_grid: TGrid

    @cached_property
    def contour(self) -> Contour:
        c = self.config.contour
        return build_contour(
            self.params, self.consts, self.table, self.spectrum,
            nodes_per_branch=c.nodes_per_branch, z_max=c.z_max,
        )


def prepare(config: SolverConfig) -> SolverSetup:
    """Параметры, таблица корней, спектр A, спектральные константы и сетки."""
    tol = Tolerances(**config.tolerances.model_dump())
    params = Params(
        omega=config.omega,
        mu=config.effective_mu,
        p=config.p,
        k=config.k,
        rho=config.rho,
        tolerances=tol,
    )
    table = find_roots(config.root_count, newton_tol=tol.newton_tol)
    spectrum = operator_spectrum(config.omega, config.root_count, tol.newton_tol)
    c = config.contour
    consts = make_spectral_constants(c.eps_l1, c.eps_l2, c.eps0, spectrum.eigenvalues, c.theta0)
    g = config.grid
    return SolverSetup(
        config=config,
        params=params,
        table=table,
        spectrum=spectrum,
        consts=consts,
        theta_grid=make_theta_grid(config.omega, g.n_theta),
        t_grid=make_t_grid(g.t_max, g.n_t, g.grading, tol.residual_tol),
    )


def resolve_rhs(source: str) -> SectorFunction:
    """`builtin:<name>` или путь к CSV с колонками x, y, f."""
    if source.startswith(BUILTIN_PREFIX):
        name = source[len(BUILTIN_PREFIX):]
        if name not in BUILTIN_RHS:
            raise IngestionError(f"unknown builtin rhs {name!r}", available=sorted(BUILTIN_RHS))
        return BUILTIN_RHS[name]
    if not Path(source).exists():
        raise IngestionError(f"rhs file {source} does not exist")
    return read_rhs_csv(source)


@dataclass(eq=False)
class SolveOutcome:
    result: SolveResult
    samples: SectorSamples
    report: dict


def solve_sector(config: SolverConfig, rhs: str, workers: int | None = None) -> SolveOutcome:
    """Полный прогон: f → F → V → u, с отчётом о сходимости и невязках."""
    setup = prepare(config)
    params = setup.params
    log.info(f"🚀 Решение: ω = {params.omega:.4f}, μ = {params.mu:.4f}, k = {params.k}, ρ = {params.rho}")

    f = resolve_rhs(rhs)
    F = build_rhs(f, params, setup.theta_grid, setup.t_grid)
    contour = setup.contour
    result = run_solve(
        F, params, setup.consts, setup.table, contour,
        max_iterations=config.max_iterations,
        theta_method=config.theta_method,
        t_method=config.t_method,
        workers=workers,
    )
    V = result.V

    if params.k == 0:
        rho0, contraction = math.inf, 0.0
    else:
        W = invert_sum(F, contour, params, setup.consts, workers=workers)
        contraction = contraction_factor(params, F, W)
        rho0 = estimate_rho0(
            params, setup.consts, setup.table, F, contour=contour, workers=workers,
            W=W, power_steps=config.rho0_power_steps,
        )

    samples = reconstruct_u(V, params)
    patch = reconstruct_u(V, params, *plate_patch(params))
    report = {
        "schema": config.schema_version,
        "config": config.model_dump(by_alias=True),
        "seed": config.seed,
        "tau": setup.table.tau,
        "mu": params.mu,
        "contour": {"kind": contour.kind, "vertex": contour.x0, "center": contour.center, "theta0": contour.theta0, "nodes": contour.size},
        "rho0": rho0,
        "contraction_factor": contraction,
        "residual": residual(V, F, params),
        "imaginary_residue": imaginary_residue(V, params.p),
        "arc_trace": V.endpoint_norms(params.p)[0],
        "edges": edge_defects(samples),
        "plate_fd_residual": plate_fd_residual(patch, f, params.k),
        **result.to_dict(),
    }
    log.info(f"✅ Решение готово: невязка {report['residual']:.3e}, итераций {result.iterations}")
    return SolveOutcome(result=result, samples=samples, report=report)


def verify(suite: str = "all", seed: int = 12345, trials: int = 100, workers: int | None = None) -> dict:
    log.info(f"🚀 Проверки: suite = {suite}, seed = {seed}")
    report = run_verification(suite, seed, trials, workers)
    if report["passed"]:
        log.info("✅ Все проверки пройдены")
    else:
        log.warning(f"⚠️ Нарушений: {report['failures']}")
    return report
