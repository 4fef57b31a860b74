"""Multiple-defaults Cox-process simulator.

Default events of a diversified portfolio are modeled as a marked point
process on time x recovery: conditionally on the intensity path, event
counts are Poisson, and each event multiplies every outstanding payment by
its recovery fraction (issuers restructure rather than vanish).  The
intensity factorizes into a piecewise-constant event rate in time and a
time-constant recovery distribution; a doubly stochastic intensity is
realized as a finite mixture of such paths.

Two experiments back the analytics:

* a Monte Carlo check that the mean survival factor (the product of event
  recoveries) matches the closed form ``exp(-integral of the mean loss
  rate)``, conditionally per path and unconditionally for mixtures;
* a diversification experiment measuring how the mean-square gap between
  portfolio payments and their intensity-conditional expectation shrinks
  as the number of equally weighted, conditionally independent issuers
  grows (like 1/M).

All sampling is reproducible from an integer seed.  Monte Carlo paths are
independent, so callers may parallelize across seeds; within one call the
reduction order is fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .cashflows import CashflowSchedule
from .errors import DomainError
from .validation import as_float_array, frozen


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class PiecewiseConstantPath:
    """Right-open piecewise-constant non-negative path on [breakpoints[0], breakpoints[-1]).

    ``values[i]`` applies on ``[breakpoints[i], breakpoints[i+1])``; the
    final breakpoint may be ``inf``.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=np.float64)
        v = as_float_array(self.values, "values")
        if b.ndim != 1 or b.size != v.size + 1:
            raise DomainError("need len(breakpoints) == len(values) + 1")
        if np.any(np.diff(b) <= 0.0):
            raise DomainError("breakpoints must be strictly increasing")
        if np.any(np.isnan(b)) or b[0] == -np.inf:
            raise DomainError("breakpoints must be finite except for a final inf")
        if np.any(v < 0.0):
            raise DomainError("path values must be non-negative")
        b = np.ascontiguousarray(b)
        b.flags.writeable = False
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", frozen(v))

    @classmethod
    def constant(cls, value: float) -> "PiecewiseConstantPath":
        return cls(breakpoints=np.array([0.0, np.inf]), values=np.array([float(value)]))

    def _check_covered(self, t: float, s: float) -> None:
        if t < self.breakpoints[0] or s > self.breakpoints[-1]:
            raise DomainError(
                f"[{t}, {s}] is not covered by the path domain "
                f"[{self.breakpoints[0]}, {self.breakpoints[-1]}]"
            )

    def value_at(self, u: float) -> float:
        self._check_covered(u, u)
        i = int(np.searchsorted(self.breakpoints, u, side="right")) - 1
        i = min(max(i, 0), self.values.size - 1)
        return float(self.values[i])

    def integral(self, t: float, s: float) -> float:
        """Exact integral over [t, s] (sum of clipped segment rectangles)."""
        if s < t:
            raise DomainError(f"need s >= t, got [{t}, {s}]")
        self._check_covered(t, s)
        if self.values.size == 1:
            return float(self.values[0]) * (s - t)
        lo = np.maximum(self.breakpoints[:-1], t)
        hi = np.minimum(self.breakpoints[1:], s)
        width = np.clip(hi - lo, 0.0, None)
        return float(np.sum(width * self.values))

    def sample_times(self, t: float, s: float, n: int, rng: np.random.Generator) -> np.ndarray:
        """``n`` event times on [t, s] by inverse transform on the normalized rate."""
        if n == 0:
            return np.empty(0)
        total = self.integral(t, s)
        if total <= 0.0:
            raise DomainError("cannot sample event times from a zero-mass path")
        if self.values.size == 1:
            # Constant rate: event times are uniform order statistics.
            return np.sort(t + (rng.random(n) * total) / self.values[0])
        lo = np.maximum(self.breakpoints[:-1], t)
        hi = np.minimum(self.breakpoints[1:], s)
        width = np.clip(hi - lo, 0.0, None)
        mass = width * self.values
        cum = np.concatenate([[0.0], np.cumsum(mass)])
        u = rng.random(n) * total
        seg = np.searchsorted(cum, u, side="right") - 1
        seg = np.clip(seg, 0, mass.size - 1)
        with np.errstate(invalid="ignore"):
            frac = np.where(mass[seg] > 0.0, (u - cum[seg]) / mass[seg], 0.0)
        return np.sort(lo[seg] + frac * width[seg])


@dataclass(frozen=True)
class RecoveryDistribution:
    """Per-event recovery fraction on [0, 1]: a point mass or a Beta law."""

    kind: str
    a: float
    b: float = 0.0

    def __post_init__(self):
        if self.kind == "point":
            if not 0.0 <= self.a <= 1.0:
                raise DomainError(f"point recovery must lie in [0, 1], got {self.a}")
        elif self.kind == "beta":
            if self.a <= 0.0 or self.b <= 0.0:
                raise DomainError("beta recovery needs positive shape parameters")
        else:
            raise DomainError(f"unknown recovery kind {self.kind!r}")

    @classmethod
    def point(cls, value: float) -> "RecoveryDistribution":
        return cls(kind="point", a=float(value))

    @classmethod
    def beta(cls, a: float, b: float) -> "RecoveryDistribution":
        return cls(kind="beta", a=float(a), b=float(b))

    @property
    def mean(self) -> float:
        if self.kind == "point":
            return self.a
        return self.a / (self.a + self.b)

    @property
    def mean_square(self) -> float:
        if self.kind == "point":
            return self.a * self.a
        s = self.a + self.b
        return self.a * (self.a + 1.0) / (s * (s + 1.0))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "point":
            return np.full(n, self.a)
        return rng.beta(self.a, self.b, size=n)


@dataclass(frozen=True)
class IntensitySpec:
    """Factorized default intensity: event-rate path(s) times a recovery law.

    A single path with weight one is the deterministic-intensity case; a
    proper mixture realizes the doubly stochastic ("conditionally Poisson")
    structure, with one path drawn per Monte Carlo trial.
    """

    paths: tuple[PiecewiseConstantPath, ...]
    weights: tuple[float, ...]
    recovery: RecoveryDistribution

    def __post_init__(self):
        paths = tuple(self.paths)
        weights = tuple(float(w) for w in self.weights)
        if not paths or len(paths) != len(weights):
            raise DomainError("need equal, non-zero numbers of paths and weights")
        if any(w < 0.0 for w in weights):
            raise DomainError("scenario weights must be non-negative")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise DomainError(f"scenario weights must sum to 1, got {sum(weights)}")
        object.__setattr__(self, "paths", paths)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def constant(cls, rate: float, recovery: RecoveryDistribution) -> "IntensitySpec":
        if rate < 0.0:
            raise DomainError(f"event rate must be >= 0, got {rate}")
        return cls(paths=(PiecewiseConstantPath.constant(rate),), weights=(1.0,), recovery=recovery)

    @classmethod
    def mixture(cls, scenarios, recovery: RecoveryDistribution) -> "IntensitySpec":
        """Build from an iterable of ``(weight, path)`` pairs."""
        scenarios = list(scenarios)
        return cls(
            paths=tuple(p for _, p in scenarios),
            weights=tuple(w for w, _ in scenarios),
            recovery=recovery,
        )

    @property
    def is_deterministic(self) -> bool:
        return len(self.paths) == 1


@dataclass(frozen=True)
class DefaultScenario:
    """Sampled default events on a horizon: times and recovery fractions."""

    times: np.ndarray
    recoveries: np.ndarray
    start: float
    end: float

    def __post_init__(self):
        times = as_float_array(self.times, "times")
        recoveries = as_float_array(self.recoveries, "recoveries")
        if times.size != recoveries.size:
            raise DomainError("times and recoveries differ in length")
        if times.size:
            if np.any(np.diff(times) < 0.0):
                raise DomainError("event times must be non-decreasing")
            if times[0] < self.start or times[-1] > self.end:
                raise DomainError("event times must lie within the horizon")
        if np.any(recoveries < 0.0) or np.any(recoveries > 1.0):
            raise DomainError("recoveries must lie in [0, 1]")
        object.__setattr__(self, "times", frozen(times))
        object.__setattr__(self, "recoveries", frozen(recoveries))

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def survival_factor(self) -> float:
        """Product of event recoveries; the factor left on every payment."""
        return float(np.prod(self.recoveries)) if len(self) else 1.0

    def survival_before(self, t: float) -> float:
        """Product of recoveries of events strictly before ``t``."""
        k = int(np.searchsorted(self.times, t, side="left"))
        return float(np.prod(self.recoveries[:k])) if k else 1.0


def mean_loss_rate(spec: IntensitySpec, u: float) -> float:
    """Instantaneous expected loss fraction per unit time at ``u``.

    Equals the event rate times one minus the mean recovery.  Defined
    conditionally on the intensity path, so mixtures are rejected.
    """
    if not spec.is_deterministic:
        raise DomainError("mean loss rate is conditional on a single intensity path")
    return spec.paths[0].value_at(u) * (1.0 - spec.recovery.mean)


def expected_survival_factor(spec: IntensitySpec, t: float, s: float) -> float:
    """Expected fraction of payments surviving [t, s].

    ``exp(-integral of the mean loss rate)`` per path, averaged over the
    scenario weights for mixtures.  Exact for piecewise-constant paths.
    """
    if s < t:
        raise DomainError(f"need s >= t, got [{t}, {s}]")
    loss = 1.0 - spec.recovery.mean
    return float(
        sum(w * math.exp(-loss * p.integral(t, s)) for w, p in zip(spec.weights, spec.paths))
    )


def simulate_defaults(spec: IntensitySpec, t: float, s: float, seed) -> DefaultScenario:
    """Sample one default scenario on [t, s].

    Draws an intensity path by scenario weight, an event count Poisson in
    the path's integrated rate, event times by inverse transform on the
    normalized rate, and recoveries iid from the recovery law.
    """
    if s <= t:
        raise DomainError(f"need s > t, got [{t}, {s}]")
    rng = _rng(seed)
    idx = rng.choice(len(spec.paths), p=np.asarray(spec.weights)) if len(spec.paths) > 1 else 0
    path = spec.paths[idx]
    total = path.integral(t, s)
    count = int(rng.poisson(total)) if total > 0.0 else 0
    times = path.sample_times(t, s, count, rng) if count else np.empty(0)
    recoveries = spec.recovery.sample(count, rng)
    return DefaultScenario(times=times, recoveries=recoveries, start=t, end=s)


def apply_defaults(schedule: CashflowSchedule, scenario: DefaultScenario) -> CashflowSchedule:
    """Scale every outstanding payment by the scenario's survival factor."""
    factor = scenario.survival_factor
    return CashflowSchedule(
        times=schedule.times.copy(),
        amounts=schedule.amounts * factor,
        epoch=schedule.epoch,
    )


def _product_of_recoveries(
    recovery: RecoveryDistribution, counts: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Per-cell product of ``counts[cell]`` iid recovery draws."""
    if recovery.kind == "point":
        return recovery.a ** counts.astype(np.float64)
    flat = counts.ravel()
    total_events = int(flat.sum())
    draws = recovery.sample(total_events, rng)
    # Ragged per-cell products via differenced cumulative log sums.
    bounds = np.concatenate([[0], np.cumsum(flat)])
    logs = np.concatenate([[0.0], np.cumsum(np.log(draws))]) if total_events else np.zeros(1)
    return np.exp(logs[bounds[1:]] - logs[bounds[:-1]]).reshape(counts.shape)


def _conditional_rates(
    spec: IntensitySpec, t: float, s: float, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Integrated event rate on [t, s] per trial, drawing one path per trial."""
    per_path = np.array([p.integral(t, s) for p in spec.paths])
    if spec.is_deterministic:
        return np.full(n, per_path[0])
    idx = rng.choice(len(spec.paths), size=n, p=np.asarray(spec.weights))
    return per_path[idx]


def _survival_factor_batches(
    spec: IntensitySpec, t: float, s: float, shape: tuple, rng: np.random.Generator
) -> np.ndarray:
    """Survival factors ``prod(recoveries)`` for ``shape`` independent trials.

    Event times do not enter the survival factor, so only counts and
    recoveries are sampled; the law is identical to chaining
    :func:`simulate_defaults`.
    """
    n = int(np.prod(shape))
    totals = _conditional_rates(spec, t, s, n, rng)
    counts = rng.poisson(totals)
    return _product_of_recoveries(spec.recovery, counts, rng).reshape(shape)


class SurvivalCheck(NamedTuple):
    """Monte Carlo vs closed-form expected survival factor."""

    mc_mean: float
    mc_stderr: float
    analytic: float
    z_score: float


def check_survival_expectation(
    spec: IntensitySpec, t: float, s: float, n_paths: int, seed=0
) -> SurvivalCheck:
    """Monte Carlo average of the survival factor against its closed form.

    Returns the sample mean over ``n_paths`` scenarios, its standard error,
    the analytic expectation and the standardized gap between them.
    """
    if n_paths < 1000:
        raise DomainError(f"need >= 1000 paths for a meaningful check, got {n_paths}")
    rng = _rng(seed)
    factors = _survival_factor_batches(spec, t, s, (n_paths,), rng)
    mc_mean = float(factors.mean())
    mc_stderr = float(factors.std(ddof=1) / math.sqrt(n_paths))
    analytic = expected_survival_factor(spec, t, s)
    if mc_stderr > 0.0:
        z = (mc_mean - analytic) / mc_stderr
    else:
        z = 0.0 if mc_mean == analytic else math.inf
    return SurvivalCheck(mc_mean, mc_stderr, analytic, z)


@dataclass(frozen=True)
class IssuerPortfolio:
    """Issuer weights and per-issuer schedules sharing the same payment dates."""

    weights: np.ndarray
    schedules: tuple[CashflowSchedule, ...]

    def __post_init__(self):
        w = as_float_array(self.weights, "weights")
        schedules = tuple(self.schedules)
        if w.size != len(schedules) or w.size == 0:
            raise DomainError("need one weight per schedule")
        if np.any(w < 0.0):
            raise DomainError("issuer weights must be non-negative")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise DomainError(f"issuer weights must sum to 1, got {w.sum()}")
        first = schedules[0].times
        for sched in schedules[1:]:
            if sched.times.size != first.size or np.any(sched.times != first):
                raise DomainError("all issuer schedules must share the same payment dates")
        object.__setattr__(self, "weights", frozen(w))
        object.__setattr__(self, "schedules", schedules)

    @classmethod
    def equal_weights(cls, schedule: CashflowSchedule, m: int) -> "IssuerPortfolio":
        if m < 1:
            raise DomainError(f"need at least one issuer, got {m}")
        return cls(weights=np.full(m, 1.0 / m), schedules=(schedule,) * m)

    def aggregate(self) -> CashflowSchedule:
        amounts = sum(w * s.amounts for w, s in zip(self.weights, self.schedules))
        return CashflowSchedule(times=self.schedules[0].times.copy(), amounts=amounts)


class DiversificationPoint(NamedTuple):
    """Mean-square gap to the conditional expectation for one issuer count."""

    n_issuers: int
    mse: float
    mc_stderr: float
    analytic: float


def analytic_mse(spec: IntensitySpec, t: float, s: float, m: int) -> float:
    """Closed-form mean-square gap for ``m`` equally weighted issuers.

    Per issuer the second moment of the survival factor is
    ``exp(-Lambda * (1 - E[rho^2]))`` (products over a Poisson number of
    iid recoveries), so the conditional variance is available per path and
    scales with 1/m under equal weights.
    """
    loss2 = 1.0 - spec.recovery.mean_square
    loss1 = 1.0 - spec.recovery.mean
    var = 0.0
    for w, p in zip(spec.weights, spec.paths):
        lam = p.integral(t, s)
        var += w * (math.exp(-loss2 * lam) - math.exp(-2.0 * loss1 * lam))
    return var / m


def diversification_experiment(
    spec: IntensitySpec,
    issuer_counts,
    n_paths: int,
    t: float = 0.0,
    s: float = 1.0,
    seed=0,
) -> list[DiversificationPoint]:
    """Estimate the mean-square gap per issuer count.

    For each count M the portfolio holds M equally weighted issuers whose
    default scenarios are independent conditionally on a shared intensity
    path; the squared gap between the portfolio survival factor and its
    conditional expectation is averaged over ``n_paths`` trials.
    """
    counts = [int(m) for m in issuer_counts]
    if not counts or any(m < 1 for m in counts):
        raise DomainError("issuer counts must be positive integers")
    rng = _rng(seed)
    loss = 1.0 - spec.recovery.mean
    results = []
    for m in counts:
        # One intensity path per trial, shared by all issuers in that row.
        rates = _conditional_rates(spec, t, s, n_paths, rng)
        conditional = np.exp(-loss * rates)
        event_counts = rng.poisson(rates[:, None], size=(n_paths, m))
        factors = _product_of_recoveries(spec.recovery, event_counts, rng)
        portfolio = factors.mean(axis=1)
        sq = (portfolio - conditional) ** 2
        results.append(
            DiversificationPoint(
                n_issuers=m,
                mse=float(sq.mean()),
                mc_stderr=float(sq.std(ddof=1) / math.sqrt(n_paths)),
                analytic=analytic_mse(spec, t, s, m),
            )
        )
    return results


def experiment_csv_rows(
    spec_id: str,
    checks: list[tuple[float, SurvivalCheck]] | None = None,
    diversification: list[DiversificationPoint] | None = None,
) -> list[list[str]]:
    """Rows for the experiments CSV: spec id, M or horizon, analytic, mc, stderr, z."""
    rows = [["spec_id", "m_or_horizon", "analytic", "mc_mean", "mc_stderr", "z"]]
    for horizon, chk in checks or []:
        rows.append(
            [spec_id, repr(float(horizon)), repr(chk.analytic), repr(chk.mc_mean), repr(chk.mc_stderr), repr(chk.z_score)]
        )
    for point in diversification or []:
        z = (point.mse - point.analytic) / point.mc_stderr if point.mc_stderr > 0 else 0.0
        rows.append(
            [spec_id, str(point.n_issuers), repr(point.analytic), repr(point.mse), repr(point.mc_stderr), repr(z)]
        )
    return rows
