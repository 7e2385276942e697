"""Command-line front end reproducing the benchmark experiments.

Exit codes: 0 success, 1 verification-check failure, 2 config error.
All outputs are CSV (plotting is left to external tools); column
contracts are documented in the README.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from .config import ConfigError, ScenarioConfig, load_config, validate_scenario
from .diagnostics import check_coupling, check_M_operator, check_resolvent_fixed_point, check_slope_at_barrier
from .estimator import estimate_rho, estimate_value, estimate_value_multi, rho_tail_bound
from .model import simulate_paths
from .optimizer import BracketExpansionError, convergence_study, find_optimal_barrier
from .output import write_barrier_rows, write_check_rows, write_estimate_rows

_CASE_CHOICE = click.Choice(["1", "2", "3"])


def _common_options(fn):
    options = [
        click.option("--config", "config_path", type=click.Path(), default=None, help="INI scenario file."),
        click.option("--case", type=_CASE_CHOICE, default=None, help="Benchmark cost case."),
        click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Master seed override."),
        click.option("--eta", type=float, default=None, help="Observation rate override."),
        click.option("--out", "out_dir", type=click.Path(file_okay=False), default="out", show_default=True),
        click.option("--paths", type=int, default=None, help="Path count override."),
        click.option("--steps", type=int, default=None, help="Grid step count override."),
        click.option("--horizon", type=float, default=None, help="Time horizon override."),
        click.option("--tol", type=float, default=None, help="Bisection tolerance override."),
        click.option("--threads", type=int, default=None, help="Worker thread count."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _load(config_path, out_dir, **overrides) -> tuple[ScenarioConfig, Path]:
    try:
        cfg = load_config(config_path, **overrides)
        validate_scenario(cfg)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        raise SystemExit(2)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out


@click.group()
def main():
    """Monte Carlo optimizer for periodic barrier control of Levy processes."""


@main.command("rho-curve")
@_common_options
def rho_curve_command(config_path, case, seed, eta, out_dir, paths, steps, horizon, tol, threads):
    """Tabulate the monotone barrier functional rho(b) and its root."""
    cfg, out = _load(config_path, out_dir, case=case, seed=seed, eta=eta, paths=paths, steps=steps, horizon=horizon, tol=tol, threads=threads)
    for path in cmd_rho_curve(cfg, out):
        click.echo(f"wrote {path}")


def cmd_rho_curve(cfg: ScenarioConfig, out: Path) -> list[Path]:
    cost = cfg.cost()
    bundle = simulate_paths(cfg.model, cfg.plan, threads=cfg.threads)
    digest, seed, eta = cfg.digest(), cfg.plan.master_seed, cfg.plan.obs_rate_eta

    rows = [("rho", float(b), None, eta, estimate_rho(bundle, cost, float(b), threads=cfg.threads)) for b in cfg.b_grid()]
    written = []
    result = None
    try:
        result = find_optimal_barrier(
            bundle, cost, cfg.tol, bracket=(cfg.bracket_lo, cfg.bracket_hi), threads=cfg.threads
        )
    except BracketExpansionError as exc:
        click.echo(f"no bisection root: {exc}", err=True)
    if result is not None:
        rows.append(("b_star", result.b_star, None, eta, result.rho_at_hi))
        rows.append(("rho_tail_bound", result.b_star, None, eta, rho_tail_bound(bundle, cost, result.b_star)))
        barrier_path = out / f"barrier_{cfg.cost_case}.csv"
        write_barrier_rows(barrier_path, digest, seed, [(cfg.cost_case, eta, result)])
        written.append(barrier_path)
    else:
        rows.append(("rho_tail_bound", float(cfg.b_grid()[-1]), None, eta, rho_tail_bound(bundle, cost, float(cfg.b_grid()[-1]))))

    curve_path = out / f"rho_curve_{cfg.cost_case}.csv"
    write_estimate_rows(curve_path, digest, seed, rows)
    return [curve_path] + written


@main.command("value-curves")
@_common_options
def value_curves_command(config_path, case, seed, eta, out_dir, paths, steps, horizon, tol, threads):
    """Value curves at the optimal barrier and the four offset barriers."""
    cfg, out = _load(config_path, out_dir, case=case, seed=seed, eta=eta, paths=paths, steps=steps, horizon=horizon, tol=tol, threads=threads)
    for path in cmd_value_curves(cfg, out):
        click.echo(f"wrote {path}")


def cmd_value_curves(cfg: ScenarioConfig, out: Path) -> list[Path]:
    cost = cfg.cost()
    bundle = simulate_paths(cfg.model, cfg.plan, threads=cfg.threads)
    digest, seed, eta = cfg.digest(), cfg.plan.master_seed, cfg.plan.obs_rate_eta
    result = find_optimal_barrier(bundle, cost, cfg.tol, bracket=(cfg.bracket_lo, cfg.bracket_hi), threads=cfg.threads)

    barriers = [result.b_star] + [result.b_star + off for off in cfg.value_offsets]
    x_grid = cfg.x_grid(result.b_star)
    rows = []
    for b in barriers:
        for x, est in zip(x_grid, estimate_value_multi(bundle, cost, b, x_grid, threads=cfg.threads)):
            rows.append(("value", b, float(x), eta, est))
        rows.append(("value_at_barrier", b, b, eta, estimate_value(bundle, cost, b, b, threads=cfg.threads)))

    curve_path = out / f"value_curves_{cfg.cost_case}.csv"
    write_estimate_rows(curve_path, digest, seed, rows)
    barrier_path = out / f"barrier_{cfg.cost_case}.csv"
    write_barrier_rows(barrier_path, digest, seed, [(cfg.cost_case, eta, result)])
    return [curve_path, barrier_path]


@main.command("converge")
@_common_options
def converge_command(config_path, case, seed, eta, out_dir, paths, steps, horizon, tol, threads):
    """Optimal barriers and value curves across the observation-rate ladder."""
    cfg, out = _load(config_path, out_dir, case=case, seed=seed, eta=eta, paths=paths, steps=steps, horizon=horizon, tol=tol, threads=threads)
    for path in cmd_converge(cfg, out):
        click.echo(f"wrote {path}")


def cmd_converge(cfg: ScenarioConfig, out: Path) -> list[Path]:
    cost = cfg.cost()
    bundle = simulate_paths(cfg.model, cfg.plan, threads=cfg.threads)
    digest, seed = cfg.digest(), cfg.plan.master_seed
    classical = find_optimal_barrier(
        bundle, cost, cfg.tol, bracket=(cfg.bracket_lo, cfg.bracket_hi), classical=True, threads=cfg.threads
    )
    x_grid = cfg.x_grid(classical.b_star)
    table = convergence_study(
        cfg.model, cfg.plan, cost, cfg.etas, x_grid=x_grid, tol=cfg.tol, threads=cfg.threads, bundle=bundle
    )

    barrier_path = out / "convergence.csv"
    write_barrier_rows(barrier_path, digest, seed, [(f"eta={row.eta:g}", row.eta, row.result) for row in table.rows])
    value_rows = []
    for row in table.rows:
        for x, est in zip(table.x_grid, row.values):
            value_rows.append(("value", row.b_star, float(x), row.eta, est))
    values_path = out / "convergence_values.csv"
    write_estimate_rows(values_path, digest, seed, value_rows)
    return [barrier_path, values_path]


@main.command("verify")
@_common_options
def verify_command(config_path, case, seed, eta, out_dir, paths, steps, horizon, tol, threads):
    """Run the structural-identity checks; exit 1 if any non-skipped check fails."""
    cfg, out = _load(config_path, out_dir, case=case, seed=seed, eta=eta, paths=paths, steps=steps, horizon=horizon, tol=tol, threads=threads)
    reports, paths_written = cmd_verify(cfg, out)
    for path in paths_written:
        click.echo(f"wrote {path}")
    failures = 0
    for report in reports:
        status = "SKIP" if report.skipped else ("PASS" if report.passed else "FAIL")
        click.echo(f"{status:4s} {report.name}: |{report.discrepancy:.6g}| <= {report.threshold:.6g} {report.note}")
        failures += 0 if (report.passed or report.skipped) else 1
    if failures:
        click.echo(f"{failures} check(s) failed", err=True)
        raise SystemExit(1)


def cmd_verify(cfg: ScenarioConfig, out: Path):
    cost = cfg.cost()
    bundle = simulate_paths(cfg.model, cfg.plan, threads=cfg.threads)
    try:
        result = find_optimal_barrier(
            bundle, cost, cfg.tol, bracket=(cfg.bracket_lo, cfg.bracket_hi), threads=cfg.threads
        )
    except BracketExpansionError as exc:
        click.echo(f"config error: cannot verify, no optimal barrier exists: {exc}", err=True)
        raise SystemExit(2)
    b_star = result.b_star

    reports = [check_slope_at_barrier(bundle, cost, b_star, threads=cfg.threads)]
    l_grid = np.arange(0.0, cfg.verify_l_max + 0.5 * cfg.verify_l_step, cfg.verify_l_step)
    reports.extend(
        check_M_operator(bundle, cost, b_star, [b_star + off for off in cfg.verify_x_offsets], l_grid, threads=cfg.threads)
    )
    reports.extend(
        check_resolvent_fixed_point(
            cfg.model,
            cfg.plan,
            cost,
            b_star,
            [b_star + off for off in cfg.resolvent_x_offsets],
            bundle=bundle,
            threads=cfg.threads,
        )
    )
    for b in cfg.verify_coupling_b:
        for eps in cfg.verify_eps:
            reports.append(check_coupling(bundle, b, eps, threads=cfg.threads))

    verify_path = out / "verify.csv"
    write_check_rows(verify_path, cfg.digest(), cfg.plan.master_seed, reports)
    return reports, [verify_path]


if __name__ == "__main__":
    sys.exit(main())
