import math

import numpy as np
import pytest

from bondform import (
    DomainError,
    HoldingPeriod,
    MarketParams,
    ReturnObservation,
    build_total_return_index,
    fit_return_model,
    generate_series,
    implied_payment_shock,
    select_lag,
    simulate_paths,
)
from bondform.series import MONTHLY_DT as DT


class TestParams:
    def test_defaults_are_valid(self):
        MarketParams()

    def test_validation(self):
        with pytest.raises(DomainError):
            MarketParams(asset_class="fx")
        with pytest.raises(DomainError):
            MarketParams(n_months=1)
        with pytest.raises(DomainError):
            MarketParams(payments_per_year=5)
        with pytest.raises(DomainError):
            MarketParams(yield_reversion=1.5)
        with pytest.raises(DomainError):
            MarketParams(cpi_lag=-1)
        with pytest.raises(DomainError):
            MarketParams(recovery=1.2)
        with pytest.raises(DomainError):
            MarketParams(cpi_lag=30, warmup_months=10)

    def test_from_file(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text(
            "# synthetic government run\n"
            "asset_class = gov\n"
            "n_months = 48   # four years\n"
            "seed = 9\n"
            "yield_vol = 0.002\n"
        )
        params = MarketParams.from_file(path)
        assert params.asset_class == "gov"
        assert params.n_months == 48
        assert params.seed == 9
        assert params.yield_vol == 0.002
        assert params.coupon_rate == 0.05  # untouched default

    def test_from_file_rejects_unknown_key(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text("volatility = 0.01\n")
        with pytest.raises(DomainError, match="unknown parameter"):
            MarketParams.from_file(path)

    def test_from_file_rejects_bad_value(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text("n_months = twelve\n")
        with pytest.raises(DomainError, match="integer"):
            MarketParams.from_file(path)

    def test_from_file_rejects_missing_equals(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text("n_months 12\n")
        with pytest.raises(DomainError, match="key = value"):
            MarketParams.from_file(path)


class TestSimulatePaths:
    def test_zero_volatility_paths_are_flat(self):
        params = MarketParams(
            yield_vol=0.0,
            yield_reversion=0.0,
            cpi_vol=0.0,
            cpi_drift=0.0,
            spread_vol=0.0,
            spread_reversion=0.0,
            n_months=24,
        )
        paths = simulate_paths(params)
        assert np.all(paths.yields == params.yield_init)
        assert np.all(paths.cpi == 100.0)
        assert np.all(paths.spread == params.spread_init)

    def test_seed_determinism_and_variation(self):
        a = simulate_paths(MarketParams(seed=5, n_months=36))
        b = simulate_paths(MarketParams(seed=5, n_months=36))
        c = simulate_paths(MarketParams(seed=6, n_months=36))
        assert np.array_equal(a.yields, b.yields)
        assert not np.array_equal(a.yields, c.yields)

    def test_yield_moments_match_stationary_ar1(self):
        params = MarketParams(n_months=10_000, seed=17, warmup_months=24)
        paths = simulate_paths(params)
        y = paths.yields
        phi = 1.0 - params.yield_reversion
        stat_std = params.yield_vol / math.sqrt(1.0 - phi * phi)
        n = y.size
        mean_se = stat_std * math.sqrt((1.0 + phi) / (1.0 - phi) / n)
        assert abs(y.mean() - params.yield_mean) < 3.0 * mean_se
        assert y.std() == pytest.approx(stat_std, rel=0.1)

    def test_cpi_strictly_positive(self):
        paths = simulate_paths(MarketParams(seed=18, cpi_vol=0.2, n_months=600))
        assert np.all(paths.cpi > 0.0)

    def test_spread_floored_at_zero(self):
        params = MarketParams(seed=19, spread_mean=0.0005, spread_vol=0.002, n_months=600)
        paths = simulate_paths(params)
        assert paths.spread.min() == 0.0  # the floor binds for these settings

    def test_corp_paths_carry_one_scenario_per_step(self):
        params = MarketParams(asset_class="corp", seed=20, n_months=30)
        paths = simulate_paths(params)
        assert len(paths.scenarios) == paths.yields.size - 1


class TestIndexConstruction:
    def test_constant_yield_is_pure_carry_every_month(self):
        params = MarketParams(yield_vol=0.0, yield_reversion=0.0, yield_init=0.05, n_months=60)
        series = generate_series(params)
        returns = series.log_returns()
        assert returns == pytest.approx(np.full(len(returns), 0.05 * DT), abs=1e-13)
        assert np.all(series.yields == 0.05)

    def test_inflation_adds_indexation_carry(self):
        params = MarketParams(
            asset_class="infl",
            yield_vol=0.0,
            yield_reversion=0.0,
            yield_init=0.02,
            cpi_vol=0.0,
            cpi_drift=0.03,
            n_months=60,
        )
        series = generate_series(params)
        returns = series.log_returns()
        # Exact: carry plus the log CPI step; the model's (Y + pi) * dt
        # differs only by the convexity of the accrual.
        assert returns == pytest.approx(
            np.full(len(returns), (0.02 + 0.03) * DT), abs=5e-6
        )

    def test_corp_with_zero_loading_matches_gov(self):
        gov = generate_series(MarketParams(asset_class="gov", seed=21, n_months=48))
        corp = generate_series(
            MarketParams(asset_class="corp", spread_loading=0.0, seed=21, n_months=48)
        )
        assert np.array_equal(gov.index, corp.index)
        assert np.array_equal(gov.yields, corp.yields)
        assert np.array_equal(gov.durations, corp.durations)
        assert corp.spread is not None and gov.spread is None

    def test_full_recovery_defaults_are_harmless(self):
        gov = generate_series(MarketParams(asset_class="gov", seed=22, n_months=48))
        corp = generate_series(
            MarketParams(asset_class="corp", recovery=1.0, seed=22, n_months=48)
        )
        assert np.array_equal(gov.index, corp.index)

    def test_reported_duration_tracks_ladder(self):
        series = generate_series(MarketParams(seed=23, n_months=120))
        assert np.all(series.durations > 2.0)
        assert np.all(series.durations < 8.0)
        assert series.durations.std() < 0.5  # rolling ladder keeps it stable

    def test_row_count_and_dates(self):
        series = generate_series(MarketParams(seed=24, n_months=200, start="1997-12"))
        assert len(series) == 200
        assert series.dates[0] == "1997-12"
        assert series.dates[1] == "1998-01"
        assert series.dates[-1] == "2014-07"

    def test_gov_one_factor_model_band(self):
        series = generate_series(MarketParams(seed=25))
        result = fit_return_model(series, "gov1")
        assert result.r_squared >= 0.99

    def test_planted_lag_recovered(self):
        for lag in (0, 3):
            series = generate_series(MarketParams(asset_class="infl", cpi_lag=lag, seed=26))
            best, _ = select_lag(series, range(0, 7))
            assert best == lag

    def test_corp_extracted_shocks_average_mean_loss(self):
        params = MarketParams(asset_class="corp", seed=27, maturity_years=3, n_months=360)
        series = generate_series(params)
        shocks = np.array(
            [
                implied_payment_shock(
                    ReturnObservation(
                        period=HoldingPeriod(0.0, DT),
                        yield_start=series.yields[s - 1],
                        yield_end=series.yields[s],
                        duration_start=series.durations[s - 1],
                        log_return=float(np.log(series.index[s] / series.index[s - 1])),
                    )
                )
                for s in range(1, len(series))
            ]
        )
        expected = -params.spread_loading * series.spread[1:] * DT
        gap = abs(shocks.mean() - expected.mean())
        assert gap < 3.0 * shocks.std(ddof=1) / math.sqrt(shocks.size)

    def test_build_accepts_precomputed_paths(self):
        params = MarketParams(seed=28, n_months=36)
        paths = simulate_paths(params)
        a = build_total_return_index(params, paths)
        b = generate_series(params)
        assert np.array_equal(a.index, b.index)
