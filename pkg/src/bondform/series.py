"""Aligned monthly observation series of a bond portfolio."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .validation import as_float_array, frozen, month_serial

MONTHLY_DT = 1.0 / 12.0

ASSET_CLASSES = ("gov", "infl", "corp")

# Optional columns a given asset class needs for its two-factor model.
CLASS_COLUMNS = {"gov": (), "infl": ("cpi",), "corp": ("spread",)}


@dataclass(frozen=True)
class ObservationSeries:
    """Monthly rows of (date, total-return index, yield, duration, ...).

    Dates are ISO year-month labels, strictly increasing with no gaps.
    ``cpi`` carries raw consumer-price-index levels (never inflation rates)
    and ``spread`` the short-maturity yield spread, both optional.  The
    observation interval is fixed at one month (dt = 1/12 year).
    """

    dates: tuple[str, ...]
    index: np.ndarray
    yields: np.ndarray
    durations: np.ndarray
    convexity: np.ndarray | None = None
    cpi: np.ndarray | None = None
    spread: np.ndarray | None = None
    asset_class: str | None = None

    def __post_init__(self):
        dates = tuple(self.dates)
        if len(dates) < 2:
            raise DomainError("series needs at least two monthly rows")
        serials = [month_serial(d) for d in dates]
        if any(b - a != 1 for a, b in zip(serials, serials[1:])):
            raise DomainError("dates must be consecutive months with no gaps")
        object.__setattr__(self, "dates", dates)
        n = len(dates)
        for name in ("index", "yields", "durations", "convexity", "cpi", "spread"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = as_float_array(arr, name)
            if arr.size != n:
                raise DomainError(f"{name} has {arr.size} rows, expected {n}")
            object.__setattr__(self, name, frozen(arr))
        if np.any(self.index <= 0.0):
            raise DomainError("total return index levels must be positive")
        if self.cpi is not None and np.any(self.cpi <= 0.0):
            raise DomainError("cpi levels must be positive")
        if self.asset_class is not None and self.asset_class not in ASSET_CLASSES:
            raise DomainError(f"unknown asset class {self.asset_class!r}")

    def __len__(self) -> int:
        return len(self.dates)

    @property
    def dt(self) -> float:
        return MONTHLY_DT

    def log_returns(self) -> np.ndarray:
        """Month-over-month log changes of the index (length n - 1)."""
        return np.diff(np.log(self.index))

    def yield_changes(self) -> np.ndarray:
        return np.diff(self.yields)

    def require_columns(self, columns, context: str = "") -> None:
        for name in columns:
            if getattr(self, name) is None:
                suffix = f" for {context}" if context else ""
                raise DomainError(f"series is missing required column {name!r}{suffix}")

    def window(self, start: int, stop: int) -> "ObservationSeries":
        """Slice rows ``start:stop`` (new series, at least two rows)."""
        def cut(arr):
            return None if arr is None else arr[start:stop]

        return replace(
            self,
            dates=self.dates[start:stop],
            index=cut(self.index),
            yields=cut(self.yields),
            durations=cut(self.durations),
            convexity=cut(self.convexity),
            cpi=cut(self.cpi),
            spread=cut(self.spread),
        )
