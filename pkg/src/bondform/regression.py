"""OLS estimation and diagnostics for the monthly return models.

Six model kinds are supported, two per asset class.  Each one explains the
monthly log return of a total-return index with carry and duration terms
whose coefficients are fixed at one, plus a small number of estimated
parameters:

* ``gov1`` / ``infl1`` / ``corp1`` -- intercept only; the dependent
  variable is the log return net of the carry term (end-of-month yield
  times 1/12) and of the duration term.
* ``gov2`` -- adds the squared monthly yield change with an estimated
  coefficient (``curvature``).
* ``infl2`` -- additionally nets out the lagged monthly inflation accrual
  computed from CPI levels; the indexation lag in months is a
  hyperparameter.
* ``corp2`` -- adds the spread carry (short spread times 1/12); the
  reported ``spread_loading`` is minus the estimated slope, so a loading
  of one means the spread passes fully through to default losses.

Reported R-squared compares residuals against the variance of the raw log
returns, so the fixed-coefficient terms count as explained variation, and
the partial R-squared of a two-factor model is the R-squared of regressing
the corresponding one-factor model's residuals on the extra regressor
(with an intercept).  Standard errors are classical, with n - p degrees of
freedom; t-statistics are coefficient over standard error.

All estimation is deterministic: identical input series produce
bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator

from .errors import DomainError, SingularDesignError
from .series import MONTHLY_DT, ObservationSeries
from .validation import frozen

MODEL_KINDS = ("gov1", "gov2", "infl1", "infl2", "corp1", "corp2")

_ONE_FACTOR = {"gov2": "gov1", "infl2": "infl1", "corp2": "corp1"}


class Coefficient(NamedTuple):
    name: str
    estimate: float
    stderr: float
    t_stat: float


@dataclass(frozen=True)
class OlsFit:
    """Raw least-squares output: point estimates, classical standard errors
    and residuals, in design-column order."""

    coefficients: np.ndarray
    stderr: np.ndarray
    residuals: np.ndarray

    @property
    def t_stats(self) -> np.ndarray:
        return self.coefficients / self.stderr


@dataclass(frozen=True)
class RegressionResult:
    kind: str
    lag_months: int
    coefficients: tuple[Coefficient, ...]
    r_squared: float
    partial_r_squared: float | None
    n_obs: int
    residuals: np.ndarray
    data_start: str
    data_end: str

    def coefficient(self, name: str) -> Coefficient:
        for c in self.coefficients:
            if c.name == name:
                return c
        raise KeyError(name)


def ols(design: np.ndarray, response: np.ndarray) -> OlsFit:
    """Ordinary least squares with classical homoskedastic standard errors.

    ``design`` must include its own intercept column if one is wanted.

    Raises
    ------
    DomainError
        If there are not strictly more observations than regressors.
    SingularDesignError
        If the design is rank deficient.
    """
    x = np.asarray(design, dtype=np.float64)
    y = np.asarray(response, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n, p = x.shape
    if y.shape != (n,):
        raise DomainError(f"response has shape {y.shape}, expected ({n},)")
    if n <= p:
        raise DomainError(f"need more than {p} observations, got {n}")
    beta, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
    if rank < p:
        raise SingularDesignError(f"design matrix has rank {rank} < {p} columns")
    residuals = y - x @ beta
    sigma2 = float(residuals @ residuals) / (n - p)
    cov = sigma2 * np.linalg.inv(x.T @ x)
    stderr = np.sqrt(np.diag(cov))
    return OlsFit(coefficients=beta, stderr=stderr, residuals=frozen(residuals))


def partial_r2(model1_residuals: np.ndarray, extra_regressor: np.ndarray) -> float:
    """Share of one-factor residual variance explained by an extra regressor.

    Regresses the residuals on the regressor plus an intercept and returns
    that regression's (centered) R-squared.  Returns 0.0 when the residuals
    are already identically zero.
    """
    res = np.asarray(model1_residuals, dtype=np.float64)
    x = np.asarray(extra_regressor, dtype=np.float64)
    if res.shape != x.shape or res.ndim != 1:
        raise DomainError("residuals and regressor must be 1-d of equal length")
    if res.size < 3:
        raise DomainError(f"need at least 3 observations, got {res.size}")
    if np.ptp(x) == 0.0:
        raise SingularDesignError("extra regressor is constant")
    sst = float(np.sum((res - res.mean()) ** 2))
    if sst == 0.0:
        return 0.0
    fit = ols(np.column_stack([np.ones_like(x), x]), res)
    ssr = float(fit.residuals @ fit.residuals)
    return 1.0 - ssr / sst


def _lagged_accrual(series: ObservationSeries, obs: np.ndarray, lag: int) -> np.ndarray:
    """Monthly indexation accrual ``cpi[s-lag]/cpi[s-1-lag] - 1`` per observation."""
    return series.cpi[obs - lag] / series.cpi[obs - 1 - lag] - 1.0


def _fit_window(
    series: ObservationSeries, kind: str, lag_months: int, first_obs: int
) -> RegressionResult:
    """Fit one model on observations ``first_obs .. n-1`` (row indices)."""
    if kind not in MODEL_KINDS:
        raise DomainError(f"unknown model kind {kind!r}, expected one of {MODEL_KINDS}")
    if lag_months < 0:
        raise DomainError(f"lag_months must be >= 0, got {lag_months}")
    if kind != "infl2":
        lag_months = 0
    if kind == "infl2":
        series.require_columns(("cpi",), context="infl2")
    if kind == "corp2":
        series.require_columns(("spread",), context="corp2")

    n = len(series)
    if first_obs < 1 + lag_months:
        first_obs = 1 + lag_months
    obs = np.arange(first_obs, n)
    if obs.size < 3:
        raise DomainError(
            f"only {obs.size} usable observations for {kind} with lag {lag_months}; need >= 3"
        )

    dlnp = series.log_returns()[obs - 1]
    y_end = series.yields[obs]
    dy = series.yields[obs] - series.yields[obs - 1]
    d_start = series.durations[obs - 1]
    dt = MONTHLY_DT

    dependent = dlnp - y_end * dt + d_start * dy
    extra = None
    if kind == "gov2":
        extra = dy * dy
    elif kind == "corp2":
        extra = series.spread[obs] * dt
    elif kind == "infl2":
        dependent = dependent - _lagged_accrual(series, obs, lag_months)

    ones = np.ones(obs.size)
    design = ones[:, None] if extra is None else np.column_stack([ones, extra])
    fit = ols(design, dependent)

    names = ["intercept"]
    estimates = [fit.coefficients[0]]
    stderrs = [fit.stderr[0]]
    if kind == "gov2":
        names.append("curvature")
        estimates.append(fit.coefficients[1])
        stderrs.append(fit.stderr[1])
    elif kind == "corp2":
        # Slope is on the spread carry; the loading enters the model with a
        # minus sign, so flip the estimate and keep the standard error.
        names.append("spread_loading")
        estimates.append(-fit.coefficients[1])
        stderrs.append(fit.stderr[1])
    coefficients = tuple(
        Coefficient(name, float(est), float(se), float(est / se))
        for name, est, se in zip(names, estimates, stderrs)
    )

    ssr = float(fit.residuals @ fit.residuals)
    sst = float(np.sum((dlnp - dlnp.mean()) ** 2))
    if sst > 0.0:
        r2 = 1.0 - ssr / sst
    else:
        r2 = 1.0 if ssr == 0.0 else 0.0  # constant returns carry no variance to explain

    partial = None
    if kind in _ONE_FACTOR:
        base = _fit_window(series, _ONE_FACTOR[kind], 0, first_obs)
        regressor = _lagged_accrual(series, obs, lag_months) if kind == "infl2" else extra
        try:
            partial = partial_r2(base.residuals, regressor)
        except SingularDesignError:
            partial = 0.0  # degenerate extra regressor explains nothing

    return RegressionResult(
        kind=kind,
        lag_months=lag_months,
        coefficients=coefficients,
        r_squared=r2,
        partial_r_squared=partial,
        n_obs=int(obs.size),
        residuals=fit.residuals,
        data_start=series.dates[first_obs],
        data_end=series.dates[-1],
    )


def fit_return_model(
    series: ObservationSeries, kind: str, lag_months: int = 0
) -> RegressionResult:
    """Fit one model kind on the full usable sample of a series."""
    return _fit_window(series, kind, lag_months, first_obs=1)


def select_lag(series: ObservationSeries, lag_grid) -> tuple[int, dict[int, float]]:
    """Grid search the indexation lag for the two-factor inflation model.

    Every lag is fitted on the common window implied by the largest lag in
    the grid so the R-squared values are comparable; ties go to the
    smallest lag.  Returns ``(best_lag, {lag: r_squared})``.
    """
    lags = sorted(set(int(x) for x in lag_grid))
    if not lags:
        raise DomainError("lag grid is empty")
    if lags[0] < 0:
        raise DomainError("lags must be >= 0")
    series.require_columns(("cpi",), context="lag selection")
    first_obs = 1 + lags[-1]
    if len(series) - first_obs < 3:
        raise DomainError(
            f"series too short to fit lags up to {lags[-1]} "
            f"({len(series)} rows, need >= {first_obs + 3})"
        )
    scores = {lag: _fit_window(series, "infl2", lag, first_obs).r_squared for lag in lags}
    best = max(lags, key=lambda lag: (scores[lag], -lag))
    return best, scores


class BondReturnRegression(BaseEstimator):
    """Scikit-learn style estimator wrapping the return-model fits.

    Parameters
    ----------
    kind : str
        One of ``gov1, gov2, infl1, infl2, corp1, corp2``.
    lag_months : int
        Indexation lag for ``infl2``; ignored by every other kind.

    Attributes (after ``fit``)
    --------------------------
    result_ : RegressionResult
    coefficients_ : dict of name -> point estimate
    r_squared_, partial_r_squared_, residuals_, n_obs_
    """

    def __init__(self, kind: str = "gov1", lag_months: int = 0):
        self.kind = kind
        self.lag_months = lag_months

    def fit(self, X: ObservationSeries, y=None):
        if not isinstance(X, ObservationSeries):
            raise DomainError(f"X must be an ObservationSeries, got {type(X).__name__}")
        result = fit_return_model(X, self.kind, self.lag_months)
        self.result_ = result
        self.coefficients_ = {c.name: c.estimate for c in result.coefficients}
        self.r_squared_ = result.r_squared
        self.partial_r_squared_ = result.partial_r_squared
        self.residuals_ = result.residuals
        self.n_obs_ = result.n_obs
        return self

    def predict(self, X: ObservationSeries) -> np.ndarray:
        """Fitted monthly log returns on the usable observations of ``X``.

        The returned array aligns with rows ``1 + lag .. n-1`` of ``X`` for
        the lagged inflation model and rows ``1 .. n-1`` otherwise.
        """
        if not hasattr(self, "result_"):
            raise DomainError("estimator is not fitted; call fit first")
        if not isinstance(X, ObservationSeries):
            raise DomainError(f"X must be an ObservationSeries, got {type(X).__name__}")
        kind = self.kind
        lag = self.result_.lag_months
        n = len(X)
        obs = np.arange(1 + lag, n)
        y_end = X.yields[obs]
        dy = X.yields[obs] - X.yields[obs - 1]
        d_start = X.durations[obs - 1]
        dt = MONTHLY_DT
        pred = self.coefficients_["intercept"] + y_end * dt - d_start * dy
        if kind == "gov2":
            pred = pred + self.coefficients_["curvature"] * dy * dy
        elif kind == "corp2":
            X.require_columns(("spread",), context="corp2")
            pred = pred - self.coefficients_["spread_loading"] * X.spread[obs] * dt
        elif kind == "infl2":
            X.require_columns(("cpi",), context="infl2")
            pred = pred + _lagged_accrual(X, obs, lag)
        return pred


def text_report(result: RegressionResult, source: str | None = None) -> str:
    """Plain-text table: coefficients with t-statistics in parentheses,
    R-squared, partial R-squared and the data range.

    The intercept is displayed multiplied by 100 (monthly percent); the
    machine-readable output of :func:`result_rows` keeps raw decimals.
    """
    title = f"Model {result.kind}"
    if result.kind == "infl2":
        title += f" (lag {result.lag_months}m)"
    if source:
        title += f" on {source}"
    lines = [title, "-" * max(34, len(title))]

    def row(label, value, tstat=None):
        cell = f"{value:>12}"
        if tstat is not None:
            cell += f"  ({tstat:.4f})"
        lines.append(f"{label:<14}{cell}")

    for c in result.coefficients:
        if c.name == "intercept":
            row("100 * c", f"{100.0 * c.estimate:.4f}", c.t_stat)
        else:
            row(c.name, f"{c.estimate:.4f}", c.t_stat)
    row("R^2", f"{100.0 * result.r_squared:.2f}%")
    if result.partial_r_squared is not None:
        row("Partial-R^2", f"{100.0 * result.partial_r_squared:.2f}%")
    row("Observations", str(result.n_obs))
    row("Data start", result.data_start)
    row("Data end", result.data_end)
    lines.append("Numbers in parentheses are t-statistics.")
    return "\n".join(lines)


def result_rows(result: RegressionResult) -> list[tuple[str, str]]:
    """Key/value rows for the machine-readable CSV report (raw decimals)."""
    rows = [("kind", result.kind), ("lag_months", str(result.lag_months))]
    for c in result.coefficients:
        rows.append((c.name, repr(c.estimate)))
        rows.append((f"{c.name}_stderr", repr(c.stderr)))
        rows.append((f"{c.name}_tstat", repr(c.t_stat)))
    rows.append(("r_squared", repr(result.r_squared)))
    if result.partial_r_squared is not None:
        rows.append(("partial_r_squared", repr(result.partial_r_squared)))
    rows.append(("n_obs", str(result.n_obs)))
    rows.append(("data_start", result.data_start))
    rows.append(("data_end", result.data_end))
    return rows
