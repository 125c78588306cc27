# app/cli.py
"""
Командная строка решателя.

    sector-solver roots --count 10 --json
    sector-solver check --omega 3.1415926 --mu 1
    sector-solver resolve-theta --config cfg.json --lambda=-2.5,1 --input F.csv --output psi.csv
    sector-solver solve --config cfg.json --rhs builtin:one --out u.csv --report report.json
    sector-solver verify --suite all --report verify.json

Коды выхода: 0 — успех, 1 — ошибка входных данных, 2 — численный отказ.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from app.config import SolverConfig, settings
from app.errors import ConfigurationError, SolverError
from app.logger import logger
from app.numerics.checks import SUITES, random_data_fn
from app.numerics.grids import Field, XFunction, x_norm
from app.numerics.resolvent_t import resolve_l1
from app.numerics.resolvent_theta import oracle_relative_error, resolve_a
from app.numerics.serialization import (
    dumps_report,
    read_field_csv,
    read_theta_csv,
    write_contour_csv,
    write_field_csv,
    write_report,
    write_sector_csv,
    write_theta_csv,
)
from app.numerics.spectra import check_condition, find_roots, separation_report
from app.numerics.sum_inverter import imaginary_residue, invert_sum
from app.runner import prepare, solve_sector, verify

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2


class _Parser(argparse.ArgumentParser):
    """Ошибка разбора аргументов — код 1, а не 2 как в argparse."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _sample_data(theta: np.ndarray, omega: float) -> tuple[np.ndarray, np.ndarray]:
    """F = (θ²(ω−θ)², 1): данные по умолчанию для resolve-*."""
    return theta**2 * (omega - theta) ** 2, np.ones_like(theta)


# =========================
# Подкоманды
# =========================
def cmd_roots(args) -> int:
    table = find_roots(args.count)
    if args.json:
        print(json.dumps({"roots": table.to_records(), "tau": table.tau}, indent=2))
    else:
        for rec in table.to_records():
            print(f"{rec['re']:>14.9f} {rec['im']:>+14.9f}i  {rec['branch']:<7} {rec['residual']:.1e}")
        print(f"τ = {table.tau:.5f}")
    return EXIT_OK


def cmd_check(args) -> int:
    table = find_roots(args.count)
    product = args.omega * args.mu
    if check_condition(args.omega, args.mu, table):
        print(f"OK: ωμ = {product:.4f} < τ = {table.tau:.4f}")
        return EXIT_OK
    print(f"FAIL: ωμ ≥ τ (ωμ = {product:.4f}, τ = {table.tau:.4f})")
    return EXIT_NUMERIC


def parse_lambda(text: str) -> complex:
    """`re,im` или одно вещественное число."""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]))
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected re,im, got {text!r}")


def cmd_resolve_theta(args) -> int:
    setup = prepare(SolverConfig.from_file(args.config))
    grid = setup.theta_grid
    if args.input:
        F = read_theta_csv(args.input, grid)
    else:
        F = XFunction(*_sample_data(grid.nodes, grid.omega))
    method = setup.config.theta_method
    sol = resolve_a(args.lam, F, grid, setup.consts.eps0, setup.params.tolerances.newton_tol, method)
    if args.output:
        write_theta_csv(args.output, sol, grid)
    print(dumps_report({
        "lam": complex(args.lam),
        "x_norm": x_norm(sol, grid, setup.params.p),
        "boundary_defects": sol.boundary_defects(grid),
    }))
    return EXIT_OK


def _load_field(args, setup) -> Field:
    if args.input:
        return read_field_csv(args.input, setup.theta_grid, setup.t_grid)
    omega = setup.params.omega
    return Field.from_function(
        setup.theta_grid, setup.t_grid,
        lambda t, th: 0.0 * t,
        lambda t, th: t * np.exp(-t) * th**2 * (omega - th) ** 2,
    )


def cmd_resolve_t(args) -> int:
    setup = prepare(SolverConfig.from_file(args.config))
    R = _load_field(args, setup)
    V = resolve_l1(args.lam, R, setup.params.mu, setup.config.t_method, setup.params.tolerances.residual_tol)
    write_field_csv(args.output, V, setup.params.mu)
    return EXIT_OK


def cmd_invert_sum(args) -> int:
    setup = prepare(SolverConfig.from_file(args.config))
    F = _load_field(args, setup)
    contour = setup.contour
    V = invert_sum(
        F, contour, setup.params, setup.consts,
        setup.config.theta_method, setup.config.t_method, args.workers,
    )
    write_field_csv(args.output, V, setup.params.mu)
    if args.contour_out:
        write_contour_csv(args.contour_out, contour)
    print(dumps_report({
        "imaginary_residue": imaginary_residue(V, setup.params.p),
        "separation": separation_report(setup.params, setup.table, setup.consts, setup.spectrum.eigenvalues).to_dict(),
    }))
    return EXIT_OK


def cmd_solve(args) -> int:
    outcome = solve_sector(SolverConfig.from_file(args.config), args.rhs, args.workers)
    write_sector_csv(args.out, outcome.samples)
    if args.field_out:
        write_field_csv(args.field_out, outcome.result.V, outcome.report["mu"])
    if args.report:
        write_report(args.report, outcome.report)
    else:
        print(dumps_report(outcome.report))
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify(args.suite, args.seed, args.trials, args.workers)
    if args.report:
        write_report(args.report, report)
    print("OK" if report["passed"] else f"FAIL: {report['failures']} violations")
    return EXIT_OK if report["passed"] else EXIT_NUMERIC


def cmd_oracle_compare(args) -> int:
    setup = prepare(SolverConfig.from_file(args.config))
    grid = setup.theta_grid
    rng = np.random.default_rng(setup.config.seed)
    errors = {}
    for lam in args.lam:
        worst = 0.0
        for _ in range(args.trials):
            F1, F2 = random_data_fn(grid.omega, rng)
            err = oracle_relative_error(
                lam, F1, F2, grid, n=args.n, p=setup.params.p,
                eps0=setup.consts.eps0, method=setup.config.theta_method,
            )
            worst = max(worst, err)
        errors[f"{lam:g}"] = worst
    print(dumps_report({"n": args.n, "trials": args.trials, "max_relative_error": errors}))
    return EXIT_OK


# =========================
# Разбор аргументов
# =========================
def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sector-solver", description="Решатель Δ²u − kΔu = f в секторе")
    parser.add_argument("-v", "--verbose", action="store_true", help="подробный лог")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("roots", help="корни sinh z ± z = 0 и порог τ")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("check", help="условие ωμ < τ")
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--count", type=int, default=10)
    p.set_defaults(func=cmd_check)

    def with_config(p):
        p.add_argument("--config", required=True)
        return p

    def with_workers(p):
        p.add_argument("--workers", type=int, default=None, help=f"по умолчанию {settings.solver_workers}")
        return p

    p = with_config(sub.add_parser("resolve-theta", help="(A − λ)⁻¹ на тестовых данных"))
    p.add_argument("--lambda", "--lam", dest="lam", type=parse_lambda, required=True, help="re,im")
    p.add_argument("--input", help="CSV theta,psi1_re,psi1_im,psi2_re,psi2_im")
    p.add_argument("--output")
    p.set_defaults(func=cmd_resolve_theta)

    p = with_config(sub.add_parser("resolve-t", help="(L₁,μ − λ)⁻¹R"))
    p.add_argument("--lam", type=complex, required=True)
    p.add_argument("--input")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_resolve_t)

    p = with_workers(with_config(sub.add_parser("invert-sum", help="V = (L₁,μ + L₂)⁻¹F контурным интегралом")))
    p.add_argument("--input")
    p.add_argument("--output", required=True)
    p.add_argument("--contour-out")
    p.set_defaults(func=cmd_invert_sum)

    p = with_workers(with_config(sub.add_parser("solve", help="полное решение по f на секторе")))
    p.add_argument("--rhs", required=True, help="builtin:<one|x|bump> или CSV x,y,f")
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--field-out")
    p.set_defaults(func=cmd_solve)

    p = with_workers(sub.add_parser("verify", help="проверка оценок и неравенств"))
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--report")
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_verify)

    p = with_config(sub.add_parser("oracle-compare", help="явная резольвента против разностного оракула"))
    p.add_argument("--lam", type=float, action="append", required=True)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--n", type=int, default=512)
    p.set_defaults(func=cmd_oracle_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logger.setLevel(logging.DEBUG if args.verbose or settings.debug else logging.INFO)
    if getattr(args, "workers", None) is not None and args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_INPUT

    try:
        return args.func(args)
    except SolverError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        logger.error(f"❌ {e}")
        print(f"error: {e}", file=sys.stderr)
        return ConfigurationError.exit_code


if __name__ == "__main__":
    sys.exit(main())
