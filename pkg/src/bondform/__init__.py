"""Bond portfolio analytics and return-model validation toolkit.

Exact pricing, yield solving and risk measures for cashflow schedules;
first- and second-order log-return models for government, inflation-linked
and corporate portfolios; an OLS harness with the matching diagnostics; a
multiple-defaults Cox-process simulator; and a synthetic-market generator
producing ground-truth datasets.
"""

from .cashflows import (
    CashflowSchedule,
    LogPricePartials,
    PortfolioAnalytics,
    analytics,
    convexity,
    log_price_partials,
    macaulay_duration,
    price_from_yield,
    yield_from_price,
)
from .data_io import align, load_series, write_series
from .defaults import (
    DefaultScenario,
    DiversificationPoint,
    IntensitySpec,
    IssuerPortfolio,
    PiecewiseConstantPath,
    RecoveryDistribution,
    SurvivalCheck,
    analytic_mse,
    apply_defaults,
    check_survival_expectation,
    diversification_experiment,
    expected_survival_factor,
    mean_loss_rate,
    simulate_defaults,
)
from .errors import (
    BondformError,
    ConvergenceError,
    DomainError,
    SchemaError,
    SingularDesignError,
)
from .market import MarketParams, MarketPaths, build_total_return_index, generate_series, simulate_paths
from .regression import (
    BondReturnRegression,
    Coefficient,
    MODEL_KINDS,
    OlsFit,
    RegressionResult,
    fit_return_model,
    ols,
    partial_r2,
    select_lag,
    text_report,
)
from .returns import (
    HoldingPeriod,
    ReturnObservation,
    exact_log_return,
    first_order_log_return,
    implied_payment_shock,
    inflation_payment_shock,
    second_order_log_return,
    spread_payment_shock,
)
from .series import ObservationSeries

__version__ = "0.1.0"

__all__ = [
    "BondReturnRegression",
    "BondformError",
    "CashflowSchedule",
    "Coefficient",
    "ConvergenceError",
    "DefaultScenario",
    "DiversificationPoint",
    "DomainError",
    "HoldingPeriod",
    "IntensitySpec",
    "IssuerPortfolio",
    "LogPricePartials",
    "MODEL_KINDS",
    "MarketParams",
    "MarketPaths",
    "ObservationSeries",
    "OlsFit",
    "PiecewiseConstantPath",
    "PortfolioAnalytics",
    "RecoveryDistribution",
    "RegressionResult",
    "ReturnObservation",
    "SchemaError",
    "SingularDesignError",
    "SurvivalCheck",
    "align",
    "analytic_mse",
    "analytics",
    "apply_defaults",
    "build_total_return_index",
    "check_survival_expectation",
    "convexity",
    "diversification_experiment",
    "exact_log_return",
    "expected_survival_factor",
    "first_order_log_return",
    "fit_return_model",
    "generate_series",
    "implied_payment_shock",
    "inflation_payment_shock",
    "load_series",
    "log_price_partials",
    "macaulay_duration",
    "mean_loss_rate",
    "ols",
    "partial_r2",
    "price_from_yield",
    "second_order_log_return",
    "select_lag",
    "simulate_defaults",
    "simulate_paths",
    "spread_payment_shock",
    "text_report",
    "write_series",
    "yield_from_price",
]
