"""Command-line front end.

Subcommands: ``price`` (schedule analytics), ``regress`` (model fits and
reports), ``synth`` (synthetic dataset generation), ``simulate`` (default
simulator experiments) and ``verify`` (the acceptance suite).  Exit codes:
0 on success, 1 on data or numeric errors, 2 on usage errors.  Reports
print percent-scaled headline numbers; files written with ``--out`` carry
raw decimals.  ``--seed`` falls back to the ``BONDFORM_SEED`` environment
variable.
"""

from __future__ import annotations

import csv
import sys
from pathlib import Path

import click

from . import acceptance
from .cashflows import analytics
from .data_io import load_schedule, load_series, write_series
from .defaults import (
    IntensitySpec,
    RecoveryDistribution,
    check_survival_expectation,
    diversification_experiment,
    experiment_csv_rows,
)
from .errors import BondformError
from .market import MarketParams, generate_series
from .regression import MODEL_KINDS, fit_return_model, result_rows, select_lag, text_report

_CLASS_OF_KIND = {kind: kind[:-1] for kind in MODEL_KINDS}


def _fail(exc: BondformError) -> "click.ClickException":
    return click.ClickException(str(exc))


def _parse_range(text: str) -> range:
    try:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise click.BadParameter(f"expected a..b, got {text!r}")
    if hi < lo:
        raise click.BadParameter(f"empty range {text!r}")
    return range(lo, hi + 1)


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}")


def _write_rows(path, rows) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        csv.writer(fh).writerows(rows)


@click.group()
@click.version_option(package_name="bondform")
def main():
    """Bond portfolio analytics, return regressions and default simulation."""


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(), help="Schedule CSV (time,amount).")
@click.option("--at", "at_time", default=0.0, show_default=True, help="Observation time in years.")
@click.option("--yield", "ytm", type=float, default=None, help="Flat continuously-compounded rate.")
@click.option("--price", "observed_price", type=float, default=None, help="Observed price (solves the yield).")
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write the analytics as CSV.")
def price(in_path, at_time, ytm, observed_price, out_path):
    """Price, yield, duration and convexity of a payment schedule."""
    if (ytm is None) == (observed_price is None):
        raise click.UsageError("provide exactly one of --yield or --price")
    try:
        schedule = load_schedule(in_path)
        result = analytics(schedule, at_time, ytm=ytm, price=observed_price)
    except BondformError as exc:
        raise _fail(exc)
    rows = [
        ("t", result.t),
        ("price", result.price),
        ("yield", result.ytm),
        ("duration", result.duration),
        ("convexity", result.convexity),
    ]
    for key, value in rows:
        click.echo(f"{key:<11}{value:.10g}")
    if out_path:
        _write_rows(out_path, [("field", "value")] + [(k, repr(float(v))) for k, v in rows])


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(), help="Series CSV.")
@click.option("--model", required=True, type=click.Choice(MODEL_KINDS), help="Model kind.")
@click.option("--lag", type=int, default=0, show_default=True, help="Indexation lag in months (infl2).")
@click.option("--lag-grid", "lag_grid", default=None, help="Search lags a..b before fitting (infl2).")
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write the report as CSV.")
def regress(in_path, model, lag, lag_grid, out_path):
    """Fit one return model to a series file and print the report table."""
    if lag_grid is not None and model != "infl2":
        raise click.UsageError("--lag-grid only applies to --model infl2")
    try:
        series = load_series(in_path, asset_class=_CLASS_OF_KIND[model])
        if lag_grid is not None:
            grid = _parse_range(lag_grid)
            lag, scores = select_lag(series, grid)
            click.echo("lag search (R^2 by lag):")
            for candidate in sorted(scores):
                marker = "  <- selected" if candidate == lag else ""
                click.echo(f"  {candidate:2d}  {100.0 * scores[candidate]:.4f}%{marker}")
        result = fit_return_model(series, model, lag_months=lag)
    except BondformError as exc:
        raise _fail(exc)
    click.echo(text_report(result, source=str(in_path)))
    if out_path:
        _write_rows(out_path, [("field", "value")] + result_rows(result))


@main.command()
@click.option("--params", "params_path", required=True, type=click.Path(), help="key = value parameter file.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Dataset CSV to write.")
@click.option("--seed", type=int, default=None, envvar="BONDFORM_SEED", help="Override the file's seed.")
def synth(params_path, out_path, seed):
    """Generate a ground-truth synthetic dataset."""
    try:
        params = MarketParams.from_file(params_path)
        if seed is not None:
            params.seed = seed
        series = generate_series(params)
        write_series(series, out_path)
    except BondformError as exc:
        raise _fail(exc)
    click.echo(f"wrote {len(series)} monthly rows ({params.asset_class}) to {out_path}")


@main.command()
@click.option("--lambda", "event_rate", required=True, type=float, help="Default event rate per year.")
@click.option("--rho", type=float, default=None, help="Point recovery fraction in [0, 1].")
@click.option("--rho-beta", "rho_beta", default=None, help="Beta recovery parameters a,b.")
@click.option("--horizon", default=1.0, show_default=True, help="Horizon in years.")
@click.option("--paths", default=100_000, show_default=True, help="Monte Carlo paths.")
@click.option("--m-grid", "m_grid", default=None, help="Issuer counts for the diversification run, e.g. 5,50,500.")
@click.option("--seed", type=int, default=0, envvar="BONDFORM_SEED", show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write experiment rows as CSV.")
def simulate(event_rate, rho, rho_beta, horizon, paths, m_grid, seed, out_path):
    """Check the mean survival factor against its closed form, and optionally
    run the issuer-diversification experiment."""
    if (rho is None) == (rho_beta is None):
        raise click.UsageError("provide exactly one of --rho or --rho-beta")
    try:
        if rho is not None:
            recovery = RecoveryDistribution.point(rho)
            spec_id = f"lambda={event_rate},rho={rho}"
        else:
            a, b = (float(x) for x in rho_beta.split(","))
            recovery = RecoveryDistribution.beta(a, b)
            spec_id = f"lambda={event_rate},rho~Beta({a},{b})"
        spec = IntensitySpec.constant(event_rate, recovery)
        chk = check_survival_expectation(spec, 0.0, horizon, n_paths=paths, seed=seed)
        click.echo(
            f"survival factor over {horizon}y: analytic {chk.analytic:.6f}, "
            f"mc {chk.mc_mean:.6f} +/- {chk.mc_stderr:.2e} (z = {chk.z_score:+.2f})"
        )
        points = []
        if m_grid is not None:
            counts = _parse_int_list(m_grid)
            points = diversification_experiment(
                spec, counts, n_paths=paths, t=0.0, s=horizon, seed=seed
            )
            click.echo("diversification (issuers -> mean-square gap, analytic):")
            for p in points:
                click.echo(f"  {p.n_issuers:6d}  {p.mse:.4e}  {p.analytic:.4e}")
    except ValueError as exc:
        raise click.UsageError(f"bad --rho-beta value: {exc}")
    except BondformError as exc:
        raise _fail(exc)
    if out_path:
        _write_rows(
            out_path,
            experiment_csv_rows(spec_id, checks=[(horizon, chk)], diversification=points),
        )


@main.command()
@click.option("--criteria", default=None, help="Subset to run, e.g. 1,2,9 (default: all).")
def verify(criteria):
    """Run the acceptance suite and print one pass/fail line per criterion."""
    numbers = _parse_int_list(criteria) if criteria else None
    try:
        results = acceptance.run_all(numbers)
    except KeyError as exc:
        raise click.UsageError(str(exc))
    for result in results:
        click.echo(result.line)
    failed = [r for r in results if not r.passed]
    click.echo(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    if failed:
        sys.exit(1)


if __name__ == "__main__":
    main()
