import datetime as dt
import math

import mpmath as mp
import numpy as np
import pytest

from bondform import (
    CashflowSchedule,
    ConvergenceError,
    DomainError,
    analytics,
    convexity,
    log_price_partials,
    macaulay_duration,
    price_from_yield,
    yield_from_price,
)


def coupon_pair():
    return CashflowSchedule(times=np.array([1.0, 2.0]), amounts=np.array([5.0, 105.0]))


def random_schedule(rng, n_lo=2, n_hi=40, max_maturity=30.0):
    n = int(rng.integers(n_lo, n_hi + 1))
    times = np.sort(rng.uniform(0.25, max_maturity, size=n))
    while np.any(np.diff(times) <= 1e-6):
        times = np.sort(rng.uniform(0.25, max_maturity, size=n))
    amounts = rng.uniform(0.5, 10.0, size=n)
    amounts[-1] += 100.0
    return CashflowSchedule(times=times, amounts=amounts)


class TestScheduleConstruction:
    def test_rejects_unsorted_times(self):
        with pytest.raises(DomainError):
            CashflowSchedule(times=np.array([2.0, 1.0]), amounts=np.array([1.0, 1.0]))

    def test_rejects_duplicate_times(self):
        with pytest.raises(DomainError):
            CashflowSchedule(times=np.array([1.0, 1.0]), amounts=np.array([1.0, 1.0]))

    def test_rejects_negative_amounts(self):
        with pytest.raises(DomainError):
            CashflowSchedule(times=np.array([1.0]), amounts=np.array([-1.0]))

    def test_rejects_all_zero_amounts(self):
        with pytest.raises(DomainError):
            CashflowSchedule(times=np.array([1.0, 2.0]), amounts=np.array([0.0, 0.0]))

    def test_rejects_empty(self):
        with pytest.raises(DomainError):
            CashflowSchedule(times=np.array([]), amounts=np.array([]))

    def test_rejects_non_finite(self):
        with pytest.raises(DomainError):
            CashflowSchedule(times=np.array([1.0, np.inf]), amounts=np.array([1.0, 1.0]))

    def test_from_pairs(self):
        sched = CashflowSchedule.from_pairs([(1.0, 5.0), (2.0, 105.0)])
        assert sched.times.tolist() == [1.0, 2.0]
        assert sched.total == 110.0

    def test_from_dates_act_365_25(self):
        epoch = dt.date(2020, 1, 1)
        sched = CashflowSchedule.from_dates(
            [dt.date(2021, 1, 1), dt.date(2022, 1, 1)], [5.0, 105.0], epoch
        )
        # 2020 is a leap year: 366 days, then 365 more.
        assert sched.times[0] == pytest.approx(366 / 365.25, abs=0)
        assert sched.times[1] == pytest.approx(731 / 365.25, abs=0)
        assert sched.epoch == epoch

    def test_arrays_are_read_only(self):
        sched = coupon_pair()
        with pytest.raises(ValueError):
            sched.times[0] = 0.5
        with pytest.raises(ValueError):
            sched.amounts[0] = 0.0


class TestPrice:
    def test_single_payment(self):
        sched = CashflowSchedule(times=np.array([1.0]), amounts=np.array([1.0]))
        assert price_from_yield(sched, 0.0, 0.05) == pytest.approx(math.exp(-0.05), rel=1e-15)

    def test_zero_yield_returns_payment_sum(self):
        sched = coupon_pair()
        assert price_from_yield(sched, 0.0, 0.0) == pytest.approx(110.0, rel=1e-15)

    def test_coupon_pair_against_direct_summation(self):
        expected = 5.0 * math.exp(-0.04) + 105.0 * math.exp(-0.08)
        assert price_from_yield(coupon_pair(), 0.0, 0.04) == pytest.approx(expected, rel=1e-15)

    def test_past_payments_silently_excluded(self):
        sched = coupon_pair()
        # At t = 1 the first payment is no longer outstanding.
        assert price_from_yield(sched, 1.0, 0.04) == pytest.approx(
            105.0 * math.exp(-0.04), rel=1e-15
        )

    def test_no_outstanding_payments_is_domain_error(self):
        with pytest.raises(DomainError):
            price_from_yield(coupon_pair(), 2.0, 0.04)

    def test_strictly_decreasing_in_yield(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            sched = random_schedule(rng)
            y1 = rng.uniform(-0.02, 0.15)
            y2 = y1 + rng.uniform(1e-6, 0.05)
            assert price_from_yield(sched, 0.0, y1) > price_from_yield(sched, 0.0, y2)

    def test_strictly_positive(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            sched = random_schedule(rng)
            assert price_from_yield(sched, 0.0, rng.uniform(-0.02, 0.15)) > 0.0


class TestYieldSolver:
    def test_single_payment_closed_form(self):
        sched = CashflowSchedule(times=np.array([1.0]), amounts=np.array([1.0]))
        assert yield_from_price(sched, 0.0, math.exp(-0.05)) == pytest.approx(0.05, abs=1e-12)

    def test_price_equal_to_sum_gives_zero_yield(self):
        assert yield_from_price(coupon_pair(), 0.0, 110.0) == pytest.approx(0.0, abs=1e-12)

    def test_round_trip_random_schedules(self):
        rng = np.random.default_rng(13)
        worst = 0.0
        for _ in range(300):
            sched = random_schedule(rng)
            y = rng.uniform(-0.02, 0.15)
            solved = yield_from_price(sched, 0.0, price_from_yield(sched, 0.0, y))
            worst = max(worst, abs(solved - y))
        assert worst < 1e-9

    def test_negative_yield_supported(self):
        sched = coupon_pair()
        price = price_from_yield(sched, 0.0, -0.015)
        assert price > sched.total
        assert yield_from_price(sched, 0.0, price) == pytest.approx(-0.015, abs=1e-12)

    def test_rejects_non_positive_price(self):
        with pytest.raises(DomainError):
            yield_from_price(coupon_pair(), 0.0, 0.0)
        with pytest.raises(DomainError):
            yield_from_price(coupon_pair(), 0.0, -5.0)

    def test_deep_extremes_still_bracket(self):
        sched = CashflowSchedule(times=np.array([30.0]), amounts=np.array([100.0]))
        assert yield_from_price(sched, 0.0, 1e-9) == pytest.approx(
            -math.log(1e-9 / 100.0) / 30.0, rel=1e-10
        )
        assert yield_from_price(sched, 0.0, 1e6) == pytest.approx(
            -math.log(1e6 / 100.0) / 30.0, rel=1e-10
        )


class TestDurationAndConvexity:
    def test_zero_coupon_duration_is_maturity(self):
        sched = CashflowSchedule(times=np.array([7.0]), amounts=np.array([3.0]))
        assert macaulay_duration(sched, 0.0, 0.03) == pytest.approx(7.0, rel=1e-15)

    def test_coupon_pair_weighted_average(self):
        w1 = 5.0 * math.exp(-0.04)
        w2 = 105.0 * math.exp(-0.08)
        expected = (1.0 * w1 + 2.0 * w2) / (w1 + w2)
        assert macaulay_duration(coupon_pair(), 0.0, 0.04) == pytest.approx(expected, rel=1e-14)

    def test_equal_payments_zero_yield(self):
        sched = CashflowSchedule(times=np.array([1.0, 3.0]), amounts=np.array([4.0, 4.0]))
        assert macaulay_duration(sched, 0.0, 0.0) == pytest.approx(2.0, rel=1e-15)
        assert convexity(sched, 0.0, 0.0) == pytest.approx(5.0, rel=1e-15)

    def test_zero_coupon_convexity_is_maturity_squared(self):
        sched = CashflowSchedule(times=np.array([7.0]), amounts=np.array([3.0]))
        assert convexity(sched, 0.0, 0.02) == pytest.approx(49.0, rel=1e-15)

    def test_duration_strictly_inside_payment_range(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            sched = random_schedule(rng, n_lo=3)
            y = rng.uniform(-0.02, 0.15)
            d = macaulay_duration(sched, 0.0, y)
            assert sched.times[0] < d < sched.times[-1]

    def test_variance_identity(self):
        rng = np.random.default_rng(15)
        for _ in range(100):
            sched = random_schedule(rng)
            y = rng.uniform(-0.02, 0.15)
            gap = convexity(sched, 0.0, y) - macaulay_duration(sched, 0.0, y) ** 2
            assert gap > 0.0
        single = CashflowSchedule(times=np.array([4.0]), amounts=np.array([1.0]))
        assert convexity(single, 0.0, 0.05) - macaulay_duration(single, 0.0, 0.05) ** 2 == pytest.approx(0.0, abs=1e-12)


class TestLogPricePartials:
    def test_cross_partial_is_one(self):
        rng = np.random.default_rng(16)
        for _ in range(20):
            sched = random_schedule(rng)
            parts = log_price_partials(sched, 0.0, rng.uniform(-0.02, 0.15))
            assert parts.d2_time_ytm == 1.0

    def test_single_payment_second_yield_partial_is_zero(self):
        sched = CashflowSchedule(times=np.array([9.0]), amounts=np.array([2.0]))
        assert log_price_partials(sched, 0.0, 0.05).d2_ytm2 == pytest.approx(0.0, abs=1e-12)

    def test_first_order_partials_match_finite_differences(self):
        rng = np.random.default_rng(17)
        h = 1e-5
        for _ in range(30):
            sched = random_schedule(rng, n_lo=3)
            y = rng.uniform(-0.02, 0.15)
            parts = log_price_partials(sched, 0.0, y)
            ln = lambda t, yy: math.log(price_from_yield(sched, t, yy))
            fd_t = (ln(h, y) - ln(-h, y)) / (2 * h)
            fd_y = (ln(0.0, y + h) - ln(0.0, y - h)) / (2 * h)
            assert fd_t == pytest.approx(parts.d_time, abs=1e-9)
            assert fd_y == pytest.approx(parts.d_ytm, rel=1e-6)

    def test_second_yield_partial_matches_high_precision_differences(self):
        # The second difference cancels catastrophically in float64, so the
        # oracle evaluates the log price in 50-digit arithmetic.
        mp.mp.dps = 50
        h = mp.mpf("1e-5")
        rng = np.random.default_rng(18)
        for _ in range(15):
            sched = random_schedule(rng, n_lo=3, n_hi=15, max_maturity=25.0)
            y = rng.uniform(-0.02, 0.15)

            def ln_mp(yy):
                total = mp.mpf(0)
                for tn, c in zip(sched.times, sched.amounts):
                    total += mp.e ** (-yy * mp.mpf(float(tn))) * mp.mpf(float(c))
                return mp.log(total)

            fd = (ln_mp(mp.mpf(y) + h) - 2 * ln_mp(mp.mpf(y)) + ln_mp(mp.mpf(y) - h)) / h**2
            exact = log_price_partials(sched, 0.0, y).d2_ytm2
            assert abs(float(fd) - exact) / abs(exact) < 1e-6


class TestAnalytics:
    def test_from_yield(self):
        result = analytics(coupon_pair(), 0.0, ytm=0.04)
        assert result.price == pytest.approx(price_from_yield(coupon_pair(), 0.0, 0.04))
        assert result.ytm == 0.04
        assert result.duration > 0.0
        assert result.convexity >= result.duration**2

    def test_from_price_solves_yield(self):
        price = price_from_yield(coupon_pair(), 0.0, 0.07)
        result = analytics(coupon_pair(), 0.0, price=price)
        assert result.ytm == pytest.approx(0.07, abs=1e-12)

    def test_requires_exactly_one_input(self):
        with pytest.raises(DomainError):
            analytics(coupon_pair(), 0.0)
        with pytest.raises(DomainError):
            analytics(coupon_pair(), 0.0, ytm=0.04, price=100.0)
