"""Synthetic market generator: ground-truth datasets for model validation.

The generator simulates monthly driver paths (a mean-reverting yield, a
log-random-walk consumer price index, a floored mean-reverting short
spread, and portfolio default events) and builds an exact total-return
index for a rolling bond ladder, with every coupon reinvested at market
prices.  Because the index, yields and durations are produced by exact
pricing, the resulting series are ground truth for the return models: the
one-factor government model should fit them almost perfectly, the lagged
inflation accrual should be recoverable by grid search, and the planted
spread loading should be recoverable by regression.

Fund mechanics (all on an integer month grid, so payments always fall on
observation dates and reinvestment needs no intra-month interest):

* the fund holds aggregate amounts per months-to-payment bucket, starting
  from a stationary ladder of equal cohorts;
* each month the maturing bucket pays out and the cash buys a fresh
  maximum-maturity cohort at the prevailing yield;
* inflation-linked portfolios scale outstanding payments with the CPI at
  the planted indexation lag (the dataset still exposes only raw CPI
  levels, so the lag has to be rediscovered from the data);
* corporate portfolios apply simulated default scenarios whose event rate
  is tied to the contemporaneous short spread, which plants the spread
  loading of the two-factor credit model.

A single series build is sequential (the ladder evolution is path
dependent); independent series can be built in parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .defaults import DefaultScenario, IntensitySpec, PiecewiseConstantPath, RecoveryDistribution, simulate_defaults
from .errors import DomainError
from .series import MONTHLY_DT, ASSET_CLASSES, ObservationSeries
from .validation import month_range

_INITIAL_INDEX = 100.0


@dataclass
class MarketParams:
    """Everything the generator needs, with regression-friendly defaults.

    Rates, drifts and vols are annualized decimals except the monthly
    innovation vols (``yield_vol``, ``spread_vol``) and the per-month
    reversion fractions, which live on the monthly grid.
    """

    asset_class: str = "gov"
    n_months: int = 240
    start: str = "2000-01"
    seed: int = 0
    # rolling-ladder template
    maturity_years: int = 10
    coupon_rate: float = 0.05
    payments_per_year: int = 12
    # yield: AR(1) on the monthly grid
    yield_init: float = 0.04
    yield_mean: float = 0.04
    yield_reversion: float = 0.10
    yield_vol: float = 0.003
    # consumer price index: log random walk with drift
    cpi_drift: float = 0.02
    cpi_vol: float = 0.01
    cpi_lag: int = 2
    # short spread: AR(1) floored at zero
    spread_init: float = 0.01
    spread_mean: float = 0.01
    spread_reversion: float = 0.05
    spread_vol: float = 0.0008
    # defaults: event rate = spread_loading * spread / (1 - recovery)
    recovery: float = 0.9999
    spread_loading: float = 0.6
    # months simulated before the recorded sample starts
    warmup_months: int = 24

    def __post_init__(self):
        if self.asset_class not in ASSET_CLASSES:
            raise DomainError(f"unknown asset class {self.asset_class!r}")
        if self.n_months < 2:
            raise DomainError("need at least two monthly rows")
        if self.payments_per_year not in (1, 2, 3, 4, 6, 12):
            raise DomainError("payments_per_year must divide 12")
        if self.maturity_years * 12 < 2:
            raise DomainError("ladder maturity must exceed one month")
        for name in ("yield_vol", "cpi_vol", "spread_vol"):
            if getattr(self, name) < 0.0:
                raise DomainError(f"{name} must be >= 0")
        for name in ("yield_reversion", "spread_reversion"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise DomainError(f"{name} must lie in [0, 1)")
        if self.cpi_lag < 0:
            raise DomainError("cpi_lag must be >= 0")
        if not 0.0 <= self.recovery <= 1.0:
            raise DomainError("recovery must lie in [0, 1]")
        if self.warmup_months < self.cpi_lag:
            raise DomainError("warmup_months must cover the planted cpi lag")

    @classmethod
    def from_file(cls, path) -> "MarketParams":
        """Parse a plain-text ``key = value`` parameter file.

        Blank lines and ``#`` comments are ignored.  Unknown keys are an
        error so typos cannot silently fall back to defaults.
        """
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise DomainError(f"cannot read params file {path}: {exc}") from exc
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key = value, got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in types:
                raise DomainError(f"{path}:{lineno}: unknown parameter {key!r}")
            if types[key] == "int":
                try:
                    kwargs[key] = int(value)
                except ValueError as exc:
                    raise DomainError(f"{path}:{lineno}: {key} must be an integer") from exc
            elif types[key] == "float":
                try:
                    kwargs[key] = float(value)
                except ValueError as exc:
                    raise DomainError(f"{path}:{lineno}: {key} must be a number") from exc
            else:
                kwargs[key] = value
        return cls(**kwargs)


@dataclass
class MarketPaths:
    """Raw simulated paths over warm-up plus sample months.

    ``yields``, ``cpi`` and ``spread`` have one value per month;
    ``scenarios[m]`` holds the default events of month ``m -> m + 1``
    (empty list when the asset class has no default risk).
    """

    yields: np.ndarray
    cpi: np.ndarray
    spread: np.ndarray
    scenarios: list[DefaultScenario]
    warmup_months: int


def simulate_paths(params: MarketParams, n_months: int | None = None) -> MarketPaths:
    """Simulate the driver paths, seed-deterministically.

    The four sources of randomness (yield, CPI, spread, defaults) use
    independent child streams of the seed, so e.g. a corporate run shares
    its yield path with the government run of the same seed.
    """
    n = params.n_months if n_months is None else int(n_months)
    if n < 2:
        raise DomainError("need at least two monthly rows")
    total = params.warmup_months + n
    ss = np.random.SeedSequence(params.seed)
    yield_rng, cpi_rng, spread_rng, default_rng = (np.random.default_rng(c) for c in ss.spawn(4))

    yields = np.empty(total)
    yields[0] = params.yield_init
    shocks = yield_rng.standard_normal(total - 1)
    for m in range(1, total):
        yields[m] = (
            yields[m - 1]
            + params.yield_reversion * (params.yield_mean - yields[m - 1])
            + params.yield_vol * shocks[m - 1]
        )

    cpi = np.empty(total)
    cpi[0] = 100.0
    steps = params.cpi_drift * MONTHLY_DT + params.cpi_vol * math.sqrt(MONTHLY_DT) * cpi_rng.standard_normal(total - 1)
    cpi[1:] = cpi[0] * np.exp(np.cumsum(steps))

    spread = np.empty(total)
    spread[0] = params.spread_init
    shocks = spread_rng.standard_normal(total - 1)
    for m in range(1, total):
        spread[m] = max(
            0.0,
            spread[m - 1]
            + params.spread_reversion * (params.spread_mean - spread[m - 1])
            + params.spread_vol * shocks[m - 1],
        )

    scenarios: list[DefaultScenario] = []
    if params.asset_class == "corp":
        recovery = RecoveryDistribution.point(params.recovery)
        loss_per_event = 1.0 - params.recovery
        for m in range(total - 1):
            t0, t1 = m * MONTHLY_DT, (m + 1) * MONTHLY_DT
            if loss_per_event == 0.0 or params.spread_loading == 0.0:
                scenarios.append(DefaultScenario(np.empty(0), np.empty(0), t0, t1))
                continue
            # Mean loss rate over the month equals loading * spread at the
            # month end, the value the two-factor model regresses on.
            rate = params.spread_loading * spread[m + 1] / loss_per_event
            spec = IntensitySpec(
                paths=(PiecewiseConstantPath(np.array([t0, t1]), np.array([rate])),),
                weights=(1.0,),
                recovery=recovery,
            )
            scenarios.append(simulate_defaults(spec, t0, t1, default_rng))

    return MarketPaths(
        yields=yields, cpi=cpi, spread=spread, scenarios=scenarios, warmup_months=params.warmup_months
    )


def _ladder_amounts(params: MarketParams) -> tuple[np.ndarray, np.ndarray]:
    """(stationary ladder, fresh cohort) amounts indexed by months to payment."""
    horizon = params.maturity_years * 12
    step = 12 // params.payments_per_year
    coupon = params.coupon_rate / params.payments_per_year
    cohort = np.zeros(horizon + 1)
    cohort[step::step] += coupon
    cohort[horizon] += 1.0
    ladder = np.zeros(horizon + 1)
    for age in range(horizon):
        paying = cohort[age + 1 :]
        ladder[1 : 1 + paying.size] += paying
    return ladder, cohort


def _bucket_value(amounts: np.ndarray, ytm: float) -> float:
    k = np.arange(amounts.size) * MONTHLY_DT
    return float(np.sum(amounts * np.exp(-ytm * k)))


def _bucket_duration(amounts: np.ndarray, ytm: float) -> float:
    k = np.arange(amounts.size) * MONTHLY_DT
    w = amounts * np.exp(-ytm * k)
    return float(np.sum(k * w) / np.sum(w))


def build_total_return_index(params: MarketParams, paths: MarketPaths | None = None) -> ObservationSeries:
    """Evolve the fund month by month and emit the observation series.

    Each month the index is the exact value of the held payments at the
    new yield, maturing payments are collected and reinvested in a fresh
    maximum-maturity cohort at the post-month price, and the reported
    yield and duration are recomputed from the evolved schedule.
    """
    if paths is None:
        paths = simulate_paths(params)
    n = paths.yields.size - paths.warmup_months
    if n < 2:
        raise DomainError("paths too short for the requested sample")
    asset = params.asset_class
    if asset == "corp" and len(paths.scenarios) != paths.yields.size - 1:
        raise DomainError("corporate paths need one default scenario per month step")

    lag = params.cpi_lag

    def freeze(m: int) -> float:
        return paths.cpi[max(m - lag, 0)]

    held, cohort = _ladder_amounts(params)
    held = held.copy()
    if asset == "infl":
        held *= freeze(0)
    held *= _INITIAL_INDEX / _bucket_value(held, paths.yields[0])
    value = _INITIAL_INDEX

    total = paths.yields.size
    first_recorded = paths.warmup_months
    index_rows, duration_rows = [], []
    for m in range(total):
        if m >= first_recorded:
            index_rows.append(value)
            duration_rows.append(_bucket_duration(held, paths.yields[m]))
        if m == total - 1:
            break
        ytm_next = paths.yields[m + 1]
        if asset == "infl":
            # Outstanding payments re-freeze at the new lagged CPI level;
            # the maturing payment is paid at that same level.
            held = held * (freeze(m + 1) / freeze(m))
        elif asset == "corp":
            held = held * paths.scenarios[m].survival_factor
        cash = held[1]
        shifted = np.zeros_like(held)
        shifted[1:-1] = held[2:]
        value = _bucket_value(shifted, ytm_next) + cash
        if cash > 0.0:
            purchase = cohort * (1.0 if asset != "infl" else freeze(m + 1))
            units = cash / _bucket_value(purchase, ytm_next)
            shifted = shifted + units * purchase
        held = shifted
        if held[1:].max() <= 0.0:
            raise DomainError("ladder exhausted before the sample end")

    sample = slice(first_recorded, total)
    return ObservationSeries(
        dates=month_range(params.start, n),
        index=np.asarray(index_rows),
        yields=paths.yields[sample].copy(),
        durations=np.asarray(duration_rows),
        cpi=paths.cpi[sample].copy() if asset == "infl" else None,
        spread=paths.spread[sample].copy() if asset == "corp" else None,
        asset_class=asset,
    )


def generate_series(params: MarketParams) -> ObservationSeries:
    """Simulate paths and build the observation series in one call."""
    return build_total_return_index(params, simulate_paths(params))
