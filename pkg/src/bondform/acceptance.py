"""Self-contained verification suite behind ``bondform verify``.

Each criterion exercises one contract of the package at a fixed tolerance
against an independent oracle: brute-force summation, high-precision
finite differences, closed-form Monte Carlo limits, or synthetic data with
planted parameters.  Every check is deterministic (fixed seeds) and
returns a pass/fail record; the CLI prints one line per criterion and the
test suite asserts on the same records.
"""

from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import mpmath as mp
import numpy as np

from .cashflows import (
    CashflowSchedule,
    convexity,
    log_price_partials,
    macaulay_duration,
    price_from_yield,
    yield_from_price,
)
from .data_io import load_series, write_series
from .market import MarketParams, generate_series
from .defaults import (
    IntensitySpec,
    PiecewiseConstantPath,
    RecoveryDistribution,
    check_survival_expectation,
    diversification_experiment,
)
from .regression import fit_return_model, select_lag
from .returns import (
    HoldingPeriod,
    ReturnObservation,
    exact_log_return,
    second_order_log_return,
    spread_payment_shock,
)
from .series import MONTHLY_DT, ObservationSeries
from .validation import month_range


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    @property
    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d} - {self.name}: {self.detail}"


def _random_schedule(rng: np.random.Generator, max_maturity: float = 30.0) -> CashflowSchedule:
    n = int(rng.integers(2, 41))
    times = np.sort(rng.uniform(0.25, max_maturity, size=n))
    while np.any(np.diff(times) <= 1e-6):
        times = np.sort(rng.uniform(0.25, max_maturity, size=n))
    amounts = rng.uniform(0.5, 10.0, size=n)
    amounts[-1] += 100.0  # principal-style final payment
    return CashflowSchedule(times=times, amounts=amounts)


def criterion_1() -> CriterionResult:
    """Yield round-trip: 1000 random schedules, |solved - true| < 1e-9, < 1 s."""
    rng = np.random.default_rng(1001)
    cases = []
    for _ in range(1000):
        sched = _random_schedule(rng)
        true_yield = rng.uniform(-0.02, 0.15)
        cases.append((sched, true_yield, price_from_yield(sched, 0.0, true_yield)))
    start = time.perf_counter()
    worst = 0.0
    for sched, true_yield, price in cases:
        solved = yield_from_price(sched, 0.0, price)
        worst = max(worst, abs(solved - true_yield))
    elapsed = time.perf_counter() - start
    passed = worst < 1e-9 and elapsed < 1.0
    return CriterionResult(
        1, "yield round-trip", passed, f"max |error| = {worst:.2e}, {elapsed:.3f} s"
    )


def criterion_2() -> CriterionResult:
    """Second-order formula is exact for single-payment schedules (< 1e-12)."""
    sched = CashflowSchedule(times=np.array([10.0]), amounts=np.array([100.0]))
    period = HoldingPeriod(0.0, MONTHLY_DT)
    duration = macaulay_duration(sched, 0.0, 0.0)
    convexity_value = convexity(sched, 0.0, 0.0)
    grid = np.linspace(-0.02, 0.15, 50)
    worst = 0.0
    for y0 in grid:
        for y1 in grid:
            obs = ReturnObservation(
                period=period,
                yield_start=y0,
                yield_end=y1,
                duration_start=duration,
                convexity_start=convexity_value,
            )
            gap = abs(
                second_order_log_return(obs, 0.0) - exact_log_return(sched, period, y0, y1)
            )
            worst = max(worst, gap)
    passed = worst < 1e-12
    return CriterionResult(2, "zero-coupon exactness", passed, f"max gap = {worst:.2e}")


def _ln_price_mp(sched: CashflowSchedule, t, y) -> mp.mpf:
    total = mp.mpf(0)
    for tn, c in zip(sched.times, sched.amounts):
        if tn > t:
            total += mp.e ** (-mp.mpf(y) * (mp.mpf(float(tn)) - mp.mpf(t))) * mp.mpf(float(c))
    return mp.log(total)


def criterion_3() -> CriterionResult:
    """Log-price partials match high-precision central differences.

    Relative tolerance 1e-6 with steps 1e-5 (both in yield and in time);
    the mixed partial must equal one to 1e-8.
    """
    mp.mp.dps = 50
    h_y = mp.mpf("1e-5")
    h_t = mp.mpf("1e-5")
    rng = np.random.default_rng(3003)
    worst_rel = 0.0
    worst_cross = 0.0
    for _ in range(100):
        n = int(rng.integers(3, 21))
        times = np.sort(rng.uniform(0.5, 25.0, size=n))
        amounts = rng.uniform(1.0, 10.0, size=n)
        sched = CashflowSchedule(times=times, amounts=amounts)
        y = rng.uniform(-0.02, 0.15)
        parts = log_price_partials(sched, 0.0, y)

        f = lambda tt, yy: _ln_price_mp(sched, tt, yy)
        fd_t = (f(h_t, y) - f(-h_t, y)) / (2 * h_t)
        fd_y = (f(0, mp.mpf(y) + h_y) - f(0, mp.mpf(y) - h_y)) / (2 * h_y)
        fd_yy = (f(0, mp.mpf(y) + h_y) - 2 * f(0, y) + f(0, mp.mpf(y) - h_y)) / h_y**2
        fd_ty = (
            f(h_t, mp.mpf(y) + h_y)
            - f(h_t, mp.mpf(y) - h_y)
            - f(-h_t, mp.mpf(y) + h_y)
            + f(-h_t, mp.mpf(y) - h_y)
        ) / (4 * h_t * h_y)

        for fd, exact in ((fd_t, parts.d_time), (fd_y, parts.d_ytm), (fd_yy, parts.d2_ytm2)):
            rel = abs(float(fd) - exact) / abs(exact)
            worst_rel = max(worst_rel, rel)
        worst_cross = max(worst_cross, abs(float(fd_ty) - 1.0), abs(parts.d2_time_ytm - 1.0))
    passed = worst_rel < 1e-6 and worst_cross < 1e-8
    return CriterionResult(
        3,
        "log-price partials vs finite differences",
        passed,
        f"max rel = {worst_rel:.2e}, max |cross - 1| = {worst_cross:.2e}",
    )


def criterion_4() -> CriterionResult:
    """Approximation error orders: slopes 2 +/- 0.25 and 3 +/- 0.25.

    Measured on an instantaneous yield shock (the passage-of-time part of
    the first-order error is exact in the shock size, so only the shock
    limit exhibits the pure expansion orders).
    """
    times = np.arange(1, 21) * 0.5
    amounts = np.full(20, 2.5)
    amounts[-1] += 100.0
    sched = CashflowSchedule(times=times, amounts=amounts)
    y = 0.04
    duration = macaulay_duration(sched, 0.0, y)
    kappa = convexity(sched, 0.0, y) - duration**2
    base = math.log(price_from_yield(sched, 0.0, y))
    shocks = np.logspace(-4, -2, 9)
    first_err, second_err = [], []
    for h in shocks:
        exact = math.log(price_from_yield(sched, 0.0, y + h)) - base
        first_err.append(abs(exact - (-duration * h)))
        second_err.append(abs(exact - (-duration * h + 0.5 * kappa * h * h)))
    slope1 = float(np.polyfit(np.log(shocks), np.log(first_err), 1)[0])
    slope2 = float(np.polyfit(np.log(shocks), np.log(second_err), 1)[0])
    passed = abs(slope1 - 2.0) <= 0.25 and abs(slope2 - 3.0) <= 0.25
    return CriterionResult(
        4, "error convergence orders", passed, f"slopes = {slope1:.3f}, {slope2:.3f}"
    )


def criterion_5() -> CriterionResult:
    """Monte Carlo survival factors match the conditional closed form.

    Three specs at 1e5 paths: constant rate with point recovery, constant
    rate with Beta recovery, and a two-scenario rate mixture; |z| < 4 and
    under 10 s each.
    """
    point = RecoveryDistribution.point(0.4)
    cases = [
        ("lambda=0.5, rho=0.4", IntensitySpec.constant(0.5, point), math.exp(-0.3)),
        (
            "lambda=1, rho~Beta(2,2)",
            IntensitySpec.constant(1.0, RecoveryDistribution.beta(2.0, 2.0)),
            math.exp(-0.5),
        ),
        (
            "mixture 0.2/0.8",
            IntensitySpec.mixture(
                [
                    (0.5, PiecewiseConstantPath.constant(0.2)),
                    (0.5, PiecewiseConstantPath.constant(0.8)),
                ],
                point,
            ),
            0.5 * (math.exp(-0.12) + math.exp(-0.48)),
        ),
    ]
    details = []
    passed = True
    for i, (label, spec, expected) in enumerate(cases):
        start = time.perf_counter()
        chk = check_survival_expectation(spec, 0.0, 1.0, n_paths=100_000, seed=500 + i)
        elapsed = time.perf_counter() - start
        ok = (
            abs(chk.z_score) < 4.0
            and abs(chk.analytic - expected) < 1e-12
            and elapsed < 10.0
        )
        passed = passed and ok
        details.append(f"{label}: z = {chk.z_score:+.2f} ({elapsed:.2f} s)")
    return CriterionResult(5, "survival-factor Monte Carlo", passed, "; ".join(details))


def criterion_6() -> CriterionResult:
    """Diversification: MSE decreasing in issuer count, MSE(500)/MSE(5) near 1/100."""
    spec = IntensitySpec.constant(0.5, RecoveryDistribution.point(0.4))
    points = diversification_experiment(spec, [5, 50, 500], n_paths=100_000, seed=600)
    mses = [p.mse for p in points]
    ratio = mses[2] / mses[0]
    passed = mses[0] > mses[1] > mses[2] and (1.0 / 200.0) <= ratio <= (1.0 / 50.0)
    return CriterionResult(
        6,
        "diversification mean-square convergence",
        passed,
        f"mse = {mses[0]:.3e}, {mses[1]:.3e}, {mses[2]:.3e}; ratio = 1/{1.0 / ratio:.1f}",
    )


def _ar1_path(rng, n, init, mean, reversion, vol, floor=None):
    path = np.empty(n)
    path[0] = init
    shocks = rng.standard_normal(n - 1)
    for i in range(1, n):
        value = path[i - 1] + reversion * (mean - path[i - 1]) + vol * shocks[i - 1]
        path[i] = value if floor is None else max(floor, value)
    return path


def _planted_series(rng, n, duration, intercept, curvature=None, spread_loading=None):
    """Series whose log returns satisfy one model exactly plus small noise."""
    yields = _ar1_path(rng, n, 0.04, 0.04, 0.15, 0.003)
    spread = _ar1_path(rng, n, 0.01, 0.01, 0.05, 0.0008, floor=0.0) if spread_loading is not None else None
    dy = np.diff(yields)
    dlnp = intercept + yields[1:] * MONTHLY_DT - duration * dy
    if curvature is not None:
        dlnp = dlnp + curvature * dy * dy
    if spread_loading is not None:
        dlnp = dlnp - spread_loading * spread[1:] * MONTHLY_DT
    dlnp = dlnp + 2e-4 * rng.standard_normal(n - 1)
    index = 100.0 * np.exp(np.concatenate([[0.0], np.cumsum(dlnp)]))
    return ObservationSeries(
        dates=month_range("2000-01", n),
        index=index,
        yields=yields,
        durations=np.full(n, duration),
        spread=spread,
        asset_class="corp" if spread_loading is not None else "gov",
    )


def criterion_7() -> CriterionResult:
    """Planted-parameter recovery: curvature, spread loading, indexation lag."""
    rng = np.random.default_rng(700)
    details = []

    gov = _planted_series(rng, 240, duration=5.0, intercept=1e-4, curvature=20.0)
    fit = fit_return_model(gov, "gov2")
    c = fit.coefficient("curvature")
    ok_curv = abs(c.estimate - 20.0) <= 2.0 * c.stderr
    details.append(f"curvature {c.estimate:.2f} +/- {c.stderr:.2f}")

    corp = _planted_series(rng, 240, duration=5.0, intercept=1e-4, spread_loading=0.6)
    fit = fit_return_model(corp, "corp2")
    a = fit.coefficient("spread_loading")
    ok_loading = abs(a.estimate - 0.6) <= 2.0 * a.stderr
    details.append(f"loading {a.estimate:.3f} +/- {a.stderr:.3f}")

    recovered = []
    for lag in (0, 1, 2, 3):
        params = MarketParams(asset_class="infl", cpi_lag=lag, seed=70 + lag)
        best, _ = select_lag(generate_series(params), range(0, 7))
        recovered.append(best)
    ok_lag = recovered == [0, 1, 2, 3]
    details.append(f"lags {recovered}")

    passed = ok_curv and ok_loading and ok_lag
    return CriterionResult(7, "planted-parameter recovery", passed, "; ".join(details))


def criterion_8() -> CriterionResult:
    """Qualitative bands on default synthetic parameters (30 bp monthly vol)."""
    details = []

    gov = generate_series(MarketParams(asset_class="gov", seed=81))
    gov1 = fit_return_model(gov, "gov1")
    ok_gov = gov1.r_squared >= 0.99
    details.append(f"gov1 R^2 = {gov1.r_squared:.6f}")

    infl = generate_series(MarketParams(asset_class="infl", seed=82))
    infl1 = fit_return_model(infl, "infl1")
    best, _ = select_lag(infl, range(0, 7))
    infl2 = fit_return_model(infl, "infl2", lag_months=best)
    ok_infl = infl2.r_squared > infl1.r_squared and infl2.partial_r_squared >= 0.5
    details.append(
        f"infl R^2 {infl1.r_squared:.4f} -> {infl2.r_squared:.6f}, "
        f"partial = {infl2.partial_r_squared:.4f}"
    )

    corp = generate_series(MarketParams(asset_class="corp", seed=83))
    corp2 = fit_return_model(corp, "corp2")
    loading = corp2.coefficient("spread_loading").estimate
    ok_corp = corp2.partial_r_squared > 0.0 and 0.0 < loading <= 1.6
    details.append(f"corp loading = {loading:.3f}, partial = {corp2.partial_r_squared:.3f}")

    passed = ok_gov and ok_infl and ok_corp
    return CriterionResult(8, "qualitative band reproduction", passed, "; ".join(details))


def criterion_9() -> CriterionResult:
    """Exact vs linear spread shock differ by < 2.45e-5 for carry <= 0.7%."""
    worst = 0.0
    for carry in np.linspace(0.0, 0.007, 1000):
        gap = abs(
            spread_payment_shock(carry, 1.0, "exact") - spread_payment_shock(carry, 1.0, "linear")
        )
        worst = max(worst, gap)
    passed = worst < 2.45e-5
    return CriterionResult(9, "spread shock linearization gap", passed, f"max gap = {worst:.3e}")


def criterion_10() -> CriterionResult:
    """CSV round trip is bit-exact and regression results are unchanged."""
    series = generate_series(MarketParams(asset_class="gov", seed=100))
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "roundtrip.csv"
        write_series(series, path)
        reloaded = load_series(path, asset_class="gov")
    same_values = (
        series.dates == reloaded.dates
        and np.array_equal(series.index, reloaded.index)
        and np.array_equal(series.yields, reloaded.yields)
        and np.array_equal(series.durations, reloaded.durations)
    )
    fit_a = fit_return_model(series, "gov1")
    fit_b = fit_return_model(reloaded, "gov1")
    same_fit = (
        fit_a.coefficients == fit_b.coefficients
        and fit_a.r_squared == fit_b.r_squared
        and np.array_equal(fit_a.residuals, fit_b.residuals)
    )
    passed = same_values and same_fit
    return CriterionResult(
        10,
        "csv round trip",
        passed,
        f"values identical: {same_values}, regression identical: {same_fit}",
    )


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def run_all(numbers=None) -> list[CriterionResult]:
    """Run the selected criteria (all by default) in order."""
    selected = sorted(CRITERIA) if numbers is None else sorted(set(numbers))
    results = []
    for number in selected:
        if number not in CRITERIA:
            raise KeyError(f"no criterion {number}")
        results.append(CRITERIA[number]())
    return results
