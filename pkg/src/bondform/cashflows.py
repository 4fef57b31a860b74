"""Exact portfolio pricing, yield solving and risk measures.

A portfolio is described by its outstanding payment schedule.  Prices use
continuous compounding throughout: the value at time ``t`` under a flat
per-annum rate ``y`` is ``sum(exp(-y * (t_n - t)) * amount_n)`` over the
payments still outstanding (``t_n > t``).  All functions here are pure and
all values are immutable after construction, so they are safe to share
between threads.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, DomainError
from .validation import as_float_array, check_finite, frozen

DAYS_PER_YEAR = 365.25  # ACT/365.25 for calendar-date ingestion

# Initial bracket for the yield solver, widened geometrically on demand.
_BRACKET_LO = -0.5
_BRACKET_HI = 2.0
_MAX_ITER = 200


@dataclass(frozen=True)
class CashflowSchedule:
    """Dated outstanding payments.

    Parameters
    ----------
    times : array-like
        Payment times in years from the epoch, strictly increasing.
    amounts : array-like
        Payment amounts, all >= 0 with at least one > 0.
    epoch : datetime.date, optional
        Calendar anchor of time zero; purely informational.
    """

    times: np.ndarray
    amounts: np.ndarray
    epoch: dt.date | None = None

    def __post_init__(self):
        times = as_float_array(self.times, "times")
        amounts = as_float_array(self.amounts, "amounts")
        if times.size == 0:
            raise DomainError("schedule must contain at least one payment")
        if times.size != amounts.size:
            raise DomainError(
                f"times and amounts differ in length ({times.size} != {amounts.size})"
            )
        if np.any(np.diff(times) <= 0.0):
            raise DomainError("payment times must be strictly increasing")
        if np.any(amounts < 0.0):
            raise DomainError("payment amounts must be non-negative")
        if not np.any(amounts > 0.0):
            raise DomainError("schedule must contain at least one positive amount")
        object.__setattr__(self, "times", frozen(times))
        object.__setattr__(self, "amounts", frozen(amounts))

    @classmethod
    def from_pairs(cls, pairs, epoch: dt.date | None = None) -> "CashflowSchedule":
        """Build from an iterable of ``(time, amount)`` pairs."""
        pairs = list(pairs)
        times = [p[0] for p in pairs]
        amounts = [p[1] for p in pairs]
        return cls(times=np.asarray(times), amounts=np.asarray(amounts), epoch=epoch)

    @classmethod
    def from_dates(cls, dates, amounts, epoch: dt.date) -> "CashflowSchedule":
        """Build from calendar dates, converted to year fractions (ACT/365.25)."""
        times = [(d - epoch).days / DAYS_PER_YEAR for d in dates]
        return cls(times=np.asarray(times), amounts=np.asarray(amounts), epoch=epoch)

    @property
    def total(self) -> float:
        """Undiscounted sum of all payments."""
        return float(np.sum(self.amounts))

    @property
    def maturity(self) -> float:
        return float(self.times[-1])

    def outstanding(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Times-to-payment and amounts of payments strictly after ``t``.

        Payments at or before ``t`` are no longer outstanding and are
        silently dropped.
        """
        tau = self.times - t
        live = tau > 0.0
        if not np.any(live):
            raise DomainError(f"no payments outstanding at t={t}")
        return tau[live], self.amounts[live]


@dataclass(frozen=True)
class PortfolioAnalytics:
    """Price, yield and risk measures of a portfolio at one observation time."""

    t: float
    price: float
    ytm: float
    duration: float
    convexity: float


class LogPricePartials(NamedTuple):
    """Partial derivatives of the log price in (time, yield)."""

    d_time: float        # equals the yield
    d_ytm: float         # minus the Macaulay duration
    d2_ytm2: float       # convexity - duration**2
    d2_time_ytm: float   # identically 1


def price_from_yield(schedule: CashflowSchedule, t: float, ytm: float) -> float:
    """Present value at time ``t`` of the outstanding payments under ``ytm``.

    Strictly positive and strictly decreasing in ``ytm``.
    """
    check_finite(ytm, "ytm")
    tau, amounts = schedule.outstanding(t)
    return float(np.sum(np.exp(-ytm * tau) * amounts))


def macaulay_duration(schedule: CashflowSchedule, t: float, ytm: float) -> float:
    """Present-value weighted average time to payment, in years."""
    check_finite(ytm, "ytm")
    tau, amounts = schedule.outstanding(t)
    w = np.exp(-ytm * tau) * amounts
    return float(np.sum(tau * w) / np.sum(w))


def convexity(schedule: CashflowSchedule, t: float, ytm: float) -> float:
    """Present-value weighted average squared time to payment, in years^2."""
    check_finite(ytm, "ytm")
    tau, amounts = schedule.outstanding(t)
    w = np.exp(-ytm * tau) * amounts
    return float(np.sum(tau * tau * w) / np.sum(w))


def log_price_partials(schedule: CashflowSchedule, t: float, ytm: float) -> LogPricePartials:
    """First- and second-order partials of ln(price) in time and yield.

    The time partial equals the yield, the yield partial equals minus the
    duration, the second yield partial equals the convexity minus the
    squared duration (the variance of the payment-time distribution), and
    the mixed partial is identically one.
    """
    d = macaulay_duration(schedule, t, ytm)
    c = convexity(schedule, t, ytm)
    return LogPricePartials(d_time=float(ytm), d_ytm=-d, d2_ytm2=c - d * d, d2_time_ytm=1.0)


def yield_from_price(schedule: CashflowSchedule, t: float, price: float) -> float:
    """Solve for the flat continuously-compounded rate matching ``price``.

    The price is strictly monotone in the rate, so the root is unique.
    Negative rates (prices above the undiscounted payment sum) are fully
    supported.  Uses Newton steps with the analytic derivative
    ``dP/dy = -duration * price`` safeguarded by a bisection bracket.

    Raises
    ------
    DomainError
        If ``price`` is not strictly positive.
    ConvergenceError
        If the iteration cap is exhausted (reports the last bracket).
    """
    price = float(price)
    if not math.isfinite(price) or price <= 0.0:
        raise DomainError(f"price must be positive, got {price}")
    tau, amounts = schedule.outstanding(t)

    def value(y: float) -> float:
        return float(np.sum(np.exp(-y * tau) * amounts))

    # Bracket the root: value() is strictly decreasing in y.
    lo, hi = _BRACKET_LO, _BRACKET_HI
    for _ in range(_MAX_ITER):
        if value(lo) > price:
            break
        lo *= 2.0
    else:
        raise ConvergenceError(f"could not bracket yield from below (lo={lo})")
    for _ in range(_MAX_ITER):
        if value(hi) < price:
            break
        hi *= 2.0
    else:
        raise ConvergenceError(f"could not bracket yield from above (hi={hi})")

    y = 0.5 * (lo + hi)
    for _ in range(_MAX_ITER):
        w = np.exp(-y * tau) * amounts
        p = float(np.sum(w))
        if abs(p - price) <= 1e-13 * price:
            return y
        if p > price:
            lo = y
        else:
            hi = y
        dp = -float(np.sum(tau * w))  # analytic derivative, always negative
        step = (price - p) / dp
        candidate = y + step
        if not (lo < candidate < hi):
            candidate = 0.5 * (lo + hi)  # fall back to bisection
        y = candidate
    raise ConvergenceError(
        f"yield solver did not converge within {_MAX_ITER} iterations "
        f"(last bracket [{lo}, {hi}])"
    )


def analytics(
    schedule: CashflowSchedule,
    t: float,
    *,
    ytm: float | None = None,
    price: float | None = None,
) -> PortfolioAnalytics:
    """Full analytics at ``t`` from either a yield or an observed price."""
    if (ytm is None) == (price is None):
        raise DomainError("provide exactly one of ytm or price")
    if ytm is None:
        ytm = yield_from_price(schedule, t, price)
    p = price_from_yield(schedule, t, ytm)
    return PortfolioAnalytics(
        t=float(t),
        price=p,
        ytm=float(ytm),
        duration=macaulay_duration(schedule, t, ytm),
        convexity=convexity(schedule, t, ytm),
    )
