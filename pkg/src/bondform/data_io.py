"""CSV ingestion, emission and alignment of observation series.

This module is the single authority on the series file format: UTF-8,
comma-delimited, ``.`` decimal separator, mandatory header.  Required
columns are ``date`` (ISO year-month), ``index`` (positive), ``yield`` and
``duration``; optional columns are ``convexity``, ``cpi`` and ``spread``.
Yields and spreads are stored as decimals (0.05, never 5.0).  Rows must be
consecutive months; any gap or reordering is a hard error.  Floats are
written with ``repr`` so a write/read round trip is bit-exact.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .cashflows import CashflowSchedule
from .errors import DomainError, SchemaError
from .series import CLASS_COLUMNS, ObservationSeries
from .validation import month_serial

REQUIRED_COLUMNS = ("date", "index", "yield", "duration")
OPTIONAL_COLUMNS = ("convexity", "cpi", "spread")

# CSV header name -> ObservationSeries field name.
_FIELD_OF = {
    "index": "index",
    "yield": "yields",
    "duration": "durations",
    "convexity": "convexity",
    "cpi": "cpi",
    "spread": "spread",
}


def load_series(path, asset_class: str | None = None) -> ObservationSeries:
    """Load and validate a series file.

    ``asset_class`` adds the class-specific column requirement (``cpi``
    for inflation-linked data, ``spread`` for corporates) and is recorded
    on the returned series.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read series file: {exc}", path=path) from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise SchemaError("file is empty, header row is mandatory", path=path)

    header = [h.strip() for h in rows[0]]
    known = set(REQUIRED_COLUMNS) | set(OPTIONAL_COLUMNS)
    for name in header:
        if name not in known:
            raise SchemaError("unknown column", path=path, column=name)
    if len(set(header)) != len(header):
        raise SchemaError("duplicated column name", path=path)
    for name in REQUIRED_COLUMNS:
        if name not in header:
            raise SchemaError("missing required column", path=path, column=name)
    if asset_class is not None:
        if asset_class not in CLASS_COLUMNS:
            raise DomainError(f"unknown asset class {asset_class!r}")
        for name in CLASS_COLUMNS[asset_class]:
            if name not in header:
                raise SchemaError(
                    f"missing column required for {asset_class!r} analysis",
                    path=path,
                    column=name,
                )

    col = {name: header.index(name) for name in header}
    data_rows = rows[1:]
    if len(data_rows) < 2:
        raise SchemaError("need at least two data rows", path=path)

    dates: list[str] = []
    values: dict[str, list[float]] = {name: [] for name in header if name != "date"}
    prev_serial = None
    for i, row in enumerate(data_rows):
        rownum = i + 2  # 1-based, counting the header
        if len(row) != len(header):
            raise SchemaError(
                f"expected {len(header)} fields, got {len(row)}", path=path, row=rownum
            )
        label = row[col["date"]].strip()
        try:
            serial = month_serial(label)
        except DomainError as exc:
            raise SchemaError(str(exc), path=path, row=rownum, column="date") from exc
        if prev_serial is not None and serial != prev_serial + 1:
            kind = "duplicated or non-increasing" if serial <= prev_serial else "gap in"
            raise SchemaError(f"{kind} monthly dates", path=path, row=rownum, column="date")
        prev_serial = serial
        dates.append(label)
        for name in values:
            raw = row[col[name]].strip()
            try:
                x = float(raw)
            except ValueError as exc:
                raise SchemaError(
                    f"cannot parse {raw!r} as a number", path=path, row=rownum, column=name
                ) from exc
            if not np.isfinite(x):
                raise SchemaError("non-finite value", path=path, row=rownum, column=name)
            if name == "index" and x <= 0.0:
                raise SchemaError("index level must be positive", path=path, row=rownum, column="index")
            if name == "cpi" and x <= 0.0:
                raise SchemaError("cpi level must be positive", path=path, row=rownum, column="cpi")
            values[name].append(x)

    kwargs = {
        _FIELD_OF[name]: np.asarray(vals, dtype=np.float64) for name, vals in values.items()
    }
    return ObservationSeries(dates=tuple(dates), asset_class=asset_class, **kwargs)


def write_series(series: ObservationSeries, path) -> None:
    """Write a series file; optional columns absent from the series are omitted."""
    path = Path(path)
    columns = list(REQUIRED_COLUMNS) + [
        name for name in OPTIONAL_COLUMNS if getattr(series, _FIELD_OF[name]) is not None
    ]
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for i, date in enumerate(series.dates):
                row = [date]
                for name in columns[1:]:
                    row.append(repr(float(getattr(series, _FIELD_OF[name])[i])))
                writer.writerow(row)
    except OSError as exc:
        raise SchemaError(f"cannot write series file: {exc}", path=path) from exc


def load_schedule(path) -> CashflowSchedule:
    """Load a payment schedule file: header ``time,amount``.

    Times are year fractions from the schedule's epoch, strictly
    increasing; amounts are non-negative currency units.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read schedule file: {exc}", path=path) from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise SchemaError("file is empty, header row is mandatory", path=path)
    header = [h.strip() for h in rows[0]]
    if header != ["time", "amount"]:
        raise SchemaError(
            f"schedule header must be 'time,amount', got {','.join(header)!r}", path=path
        )
    times, amounts = [], []
    for i, row in enumerate(rows[1:]):
        rownum = i + 2
        if len(row) != 2:
            raise SchemaError(f"expected 2 fields, got {len(row)}", path=path, row=rownum)
        for name, raw, dest in (("time", row[0], times), ("amount", row[1], amounts)):
            try:
                dest.append(float(raw.strip()))
            except ValueError as exc:
                raise SchemaError(
                    f"cannot parse {raw!r} as a number", path=path, row=rownum, column=name
                ) from exc
    if not times:
        raise SchemaError("schedule has no payment rows", path=path)
    try:
        return CashflowSchedule(times=np.asarray(times), amounts=np.asarray(amounts))
    except DomainError as exc:
        raise SchemaError(str(exc), path=path) from exc


def align(
    series_list,
    date_range: tuple[str, str] | None = None,
) -> list[ObservationSeries]:
    """Trim series to a common monthly window.

    The window is the intersection of all series ranges, further clipped to
    ``date_range`` (inclusive labels) when given.  All outputs share
    identical date vectors.
    """
    series_list = list(series_list)
    if not series_list:
        raise DomainError("align needs at least one series")
    start = max(month_serial(s.dates[0]) for s in series_list)
    stop = min(month_serial(s.dates[-1]) for s in series_list)
    if date_range is not None:
        start = max(start, month_serial(date_range[0]))
        stop = min(stop, month_serial(date_range[1]))
    if stop - start + 1 < 2:
        raise DomainError("series have no common monthly window of at least two rows")
    out = []
    for s in series_list:
        offset = start - month_serial(s.dates[0])
        out.append(s.window(offset, offset + (stop - start + 1)))
    return out
