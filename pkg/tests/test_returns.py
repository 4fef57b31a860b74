import math

import numpy as np
import pytest

from bondform import (
    CashflowSchedule,
    DomainError,
    HoldingPeriod,
    ReturnObservation,
    convexity,
    exact_log_return,
    first_order_log_return,
    implied_payment_shock,
    inflation_payment_shock,
    macaulay_duration,
    price_from_yield,
    second_order_log_return,
    spread_payment_shock,
)

DT = 1.0 / 12.0


def short_ladder(maturity_years=7, coupon=0.05):
    """Semiannual ladder; short enough that the convexity gap stays small."""
    n = maturity_years * 2
    times = np.arange(1, n + 1) * 0.5
    amounts = np.full(n, coupon / 2 * 100)
    amounts[-1] += 100.0
    return CashflowSchedule(times=times, amounts=amounts)


def observation(schedule, y0, y1, dt=DT, **extra):
    return ReturnObservation(
        period=HoldingPeriod(0.0, dt),
        yield_start=y0,
        yield_end=y1,
        duration_start=macaulay_duration(schedule, 0.0, y0),
        convexity_start=convexity(schedule, 0.0, y0),
        **extra,
    )


class TestHoldingPeriod:
    def test_dt(self):
        assert HoldingPeriod(1.0, 1.25).dt == 0.25

    def test_rejects_degenerate(self):
        with pytest.raises(DomainError):
            HoldingPeriod(1.0, 1.0)
        with pytest.raises(DomainError):
            HoldingPeriod(1.0, 0.5)


class TestExactLogReturn:
    def test_constant_yield_zero_coupon_is_pure_carry(self):
        sched = CashflowSchedule(times=np.array([10.0]), amounts=np.array([1.0]))
        period = HoldingPeriod(0.0, DT)
        assert exact_log_return(sched, period, 0.05, 0.05) == pytest.approx(0.05 * DT, abs=1e-15)

    def test_zero_coupon_algebraic_identity(self):
        maturity = 8.0
        sched = CashflowSchedule(times=np.array([maturity]), amounts=np.array([1.0]))
        period = HoldingPeriod(0.0, DT)
        y0, y1 = 0.03, 0.041
        expected = y1 * DT - maturity * (y1 - y0)
        assert exact_log_return(sched, period, y0, y1) == pytest.approx(expected, abs=1e-14)

    def test_matches_independent_two_price_computation(self):
        sched = short_ladder()
        period = HoldingPeriod(0.1, 0.1 + DT)
        y0, y1 = 0.04, 0.052
        # Direct summation oracle, bypassing price_from_yield.
        p0 = sum(c * math.exp(-y0 * (t - period.start)) for t, c in zip(sched.times, sched.amounts) if t > period.start)
        p1 = sum(c * math.exp(-y1 * (t - period.end)) for t, c in zip(sched.times, sched.amounts) if t > period.end)
        assert exact_log_return(sched, period, y0, y1) == pytest.approx(
            math.log(p1 / p0), rel=1e-14
        )

    def test_payment_inside_period_rejected(self):
        sched = short_ladder()
        with pytest.raises(DomainError):
            exact_log_return(sched, HoldingPeriod(0.4, 0.6), 0.04, 0.04)


class TestFirstOrder:
    def test_carry_only(self):
        sched = short_ladder()
        obs = observation(sched, 0.05, 0.05)
        assert first_order_log_return(obs, 0.0) == pytest.approx(0.05 * DT, abs=1e-15)

    def test_shock_passes_through(self):
        sched = short_ladder()
        obs = observation(sched, 0.05, 0.05)
        assert first_order_log_return(obs, 0.002) == pytest.approx(0.05 * DT + 0.002, abs=1e-15)

    def test_uses_observation_shock_field_by_default(self):
        sched = short_ladder()
        obs = observation(sched, 0.05, 0.05, payment_shock=0.003)
        assert first_order_log_return(obs) == first_order_log_return(obs, 0.003)

    def test_error_bounded_by_time_cross_term(self):
        # For a zero coupon the only first-order error term is dt * dy plus
        # the quadratic remainder.
        maturity = 10.0
        sched = CashflowSchedule(times=np.array([maturity]), amounts=np.array([1.0]))
        period = HoldingPeriod(0.0, DT)
        for dy in np.linspace(-0.01, 0.01, 21):
            y0 = 0.04
            obs = observation(sched, y0, y0 + dy)
            err = abs(
                first_order_log_return(obs, 0.0)
                - exact_log_return(sched, period, y0, y0 + dy)
            )
            assert err <= abs(DT * dy) + 1e-12

    def test_implied_return_stays_above_minus_one(self):
        rng = np.random.default_rng(21)
        for _ in range(200):
            obs = ReturnObservation(
                period=HoldingPeriod(0.0, DT),
                yield_start=rng.uniform(-0.02, 0.15),
                yield_end=rng.uniform(-0.02, 0.15),
                duration_start=rng.uniform(0.1, 20.0),
            )
            value = math.exp(first_order_log_return(obs, rng.normal(0, 0.01))) - 1.0
            assert value > -1.0


class TestSecondOrder:
    def test_exact_for_single_payment(self):
        sched = CashflowSchedule(times=np.array([10.0]), amounts=np.array([100.0]))
        period = HoldingPeriod(0.0, DT)
        grid = np.linspace(-0.02, 0.15, 10)
        for y0 in grid:
            for y1 in grid:
                obs = observation(sched, y0, y1)
                gap = abs(
                    second_order_log_return(obs, 0.0) - exact_log_return(sched, period, y0, y1)
                )
                assert gap < 1e-12

    def test_zero_yield_change(self):
        sched = short_ladder()
        obs = observation(sched, 0.04, 0.04)
        assert second_order_log_return(obs, 0.001) == pytest.approx(0.04 * DT + 0.001, abs=1e-15)

    def test_requires_convexity(self):
        obs = ReturnObservation(
            period=HoldingPeriod(0.0, DT), yield_start=0.04, yield_end=0.05, duration_start=5.0
        )
        with pytest.raises(DomainError):
            second_order_log_return(obs, 0.0)

    def test_error_ordering_on_short_ladders(self):
        # Restricted to ladders whose convexity gap keeps the first-order
        # error's sign fixed over |dy| <= 0.02 (gap < 2 * dt / 0.02); for
        # longer portfolios the first-order error crosses zero inside the
        # range and the ordering can flip there.
        rng = np.random.default_rng(22)
        period = HoldingPeriod(0.0, DT)
        for _ in range(300):
            maturity = int(rng.integers(2, 8))
            sched = short_ladder(maturity_years=maturity, coupon=rng.uniform(0.0, 0.08))
            y0 = rng.uniform(-0.02, 0.15)
            dy = rng.uniform(-0.02, 0.02)
            obs = observation(sched, y0, y0 + dy)
            exact = exact_log_return(sched, period, y0, y0 + dy)
            err1 = abs(first_order_log_return(obs, 0.0) - exact)
            err2 = abs(second_order_log_return(obs, 0.0) - exact)
            assert err2 <= err1 + 1e-12

    def test_convergence_orders_under_instant_shock(self):
        sched = short_ladder(maturity_years=10)
        y = 0.04
        duration = macaulay_duration(sched, 0.0, y)
        kappa = convexity(sched, 0.0, y) - duration**2
        base = math.log(price_from_yield(sched, 0.0, y))
        shocks = np.logspace(-4, -2, 9)
        e1, e2 = [], []
        for h in shocks:
            exact = math.log(price_from_yield(sched, 0.0, y + h)) - base
            e1.append(abs(exact + duration * h))
            e2.append(abs(exact + duration * h - 0.5 * kappa * h * h))
        slope1 = np.polyfit(np.log(shocks), np.log(e1), 1)[0]
        slope2 = np.polyfit(np.log(shocks), np.log(e2), 1)[0]
        assert abs(slope1 - 2.0) <= 0.25
        assert abs(slope2 - 3.0) <= 0.25


class TestPaymentShocks:
    def test_inflation_unchanged_index(self):
        assert inflation_payment_shock(100.0, 100.0, DT) == (0.0, 0.0)

    def test_inflation_monthly_example(self):
        rate, shock = inflation_payment_shock(100.0, 100.2, DT)
        assert shock == pytest.approx(0.002, rel=1e-12)
        assert rate == pytest.approx(0.024, rel=1e-12)

    def test_inflation_rejects_non_positive_levels(self):
        with pytest.raises(DomainError):
            inflation_payment_shock(0.0, 100.0, DT)
        with pytest.raises(DomainError):
            inflation_payment_shock(100.0, -1.0, DT)

    def test_spread_zero(self):
        assert spread_payment_shock(0.0, DT, "exact") == 0.0
        assert spread_payment_shock(0.0, DT, "linear") == 0.0

    def test_spread_forms_gap_below_quarter_basis_point(self):
        # Spread carry of 0.7% per period is the worst case considered.
        for carry in np.linspace(0.0, 0.007, 200):
            gap = abs(
                spread_payment_shock(carry, 1.0, "exact")
                - spread_payment_shock(carry, 1.0, "linear")
            )
            assert gap < 2.45e-5

    def test_spread_gap_is_half_square_to_leading_order(self):
        s, dt = 0.02, DT
        gap = spread_payment_shock(s, dt, "exact") - spread_payment_shock(s, dt, "linear")
        x = s * dt
        assert gap == pytest.approx(0.5 * x * x, rel=2e-3)

    def test_spread_unknown_form(self):
        with pytest.raises(DomainError):
            spread_payment_shock(0.01, DT, "quadratic")


class TestImpliedShock:
    def test_inverts_first_order(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            shock = rng.normal(0.0, 0.01)
            base = ReturnObservation(
                period=HoldingPeriod(0.0, DT),
                yield_start=rng.uniform(-0.02, 0.15),
                yield_end=rng.uniform(-0.02, 0.15),
                duration_start=rng.uniform(0.1, 15.0),
            )
            obs = ReturnObservation(
                period=base.period,
                yield_start=base.yield_start,
                yield_end=base.yield_end,
                duration_start=base.duration_start,
                log_return=first_order_log_return(base, shock),
            )
            assert implied_payment_shock(obs) == pytest.approx(shock, abs=1e-15)

    def test_requires_log_return(self):
        obs = ReturnObservation(
            period=HoldingPeriod(0.0, DT), yield_start=0.04, yield_end=0.05, duration_start=5.0
        )
        with pytest.raises(DomainError):
            implied_payment_shock(obs)

    def test_default_free_synthetic_observation_near_zero(self):
        sched = short_ladder()
        period = HoldingPeriod(0.0, DT)
        y0, y1 = 0.04, 0.043
        obs = ReturnObservation(
            period=period,
            yield_start=y0,
            yield_end=y1,
            duration_start=macaulay_duration(sched, 0.0, y0),
            log_return=exact_log_return(sched, period, y0, y1),
        )
        # Zero up to the first-order approximation error, whose leading
        # terms are dt * dy and the quadratic yield term.
        dy = y1 - y0
        kappa = convexity(sched, 0.0, y0) - macaulay_duration(sched, 0.0, y0) ** 2
        bound = abs(DT * dy) + kappa * dy * dy
        assert abs(implied_payment_shock(obs)) < bound
