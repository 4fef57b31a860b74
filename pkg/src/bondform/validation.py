"""Small input-validation helpers used across the package."""

from __future__ import annotations

import re

import numpy as np

from .errors import DomainError

_MONTH_RE = re.compile(r"^(\d{4})-(0[1-9]|1[0-2])$")


def as_float_array(x, name: str) -> np.ndarray:
    """Coerce to a 1-d float64 array, rejecting NaN/inf."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def check_finite(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value}")
    return value


def check_positive(value: float, name: str) -> float:
    value = check_finite(value, name)
    if value <= 0.0:
        raise DomainError(f"{name} must be positive, got {value}")
    return value


def frozen(arr: np.ndarray) -> np.ndarray:
    """Return a read-only view so shared values stay immutable."""
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


def month_serial(label: str) -> int:
    """Serial month number of an ISO year-month label like ``2010-03``."""
    m = _MONTH_RE.match(label)
    if m is None:
        raise DomainError(f"invalid year-month label {label!r}, expected YYYY-MM")
    year, month = int(m.group(1)), int(m.group(2))
    return year * 12 + (month - 1)


def month_label(serial: int) -> str:
    year, month = divmod(int(serial), 12)
    return f"{year:04d}-{month + 1:02d}"


def month_range(start: str, n: int) -> tuple[str, ...]:
    """``n`` consecutive monthly labels beginning at ``start``."""
    if n < 1:
        raise DomainError(f"month range length must be >= 1, got {n}")
    first = month_serial(start)
    return tuple(month_label(first + i) for i in range(n))
