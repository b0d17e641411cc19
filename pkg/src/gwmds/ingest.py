"""Electricity Load Diagrams ingestion and daily multi-view slicing.

The UCI distribution is a single semicolon-separated text file with a
timestamp column followed by one column per client, using a comma as
decimal mark and 15-minute sampling.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .relational import MultiViewDataset, SampleMatrix

logger = logging.getLogger(__name__)

SLOT = pd.Timedelta(minutes=15)
SLOTS_PER_DAY = 96
FULL_SHAPE = (370, 140256)


class EldParseError(ValueError):
    """Malformed load-diagram file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class LoadSeries:
    clients: tuple
    timestamps: pd.DatetimeIndex
    values: np.ndarray  # clients x timesteps, kW

    @property
    def shape(self):
        return self.values.shape


def load_eld(path, delimiter: str = ";", decimal_mark: str = ",", fill: str | None = None) -> LoadSeries:
    """Parse a load-diagram file into a clients x time matrix.

    Parameters
    ----------
    path : path-like
    delimiter, decimal_mark : str
    fill : {None, 'zero', 'previous'}
        How to treat empty cells. ``None`` rejects them.

    Raises
    ------
    EldParseError
        On an empty file, a malformed row, a non-numeric cell, missing
        values (without ``fill``) or irregular timestamp spacing.
    """
    path = Path(path)
    if fill not in (None, "zero", "previous"):
        raise ValueError(f"unknown fill mode {fill!r}")
    try:
        df = pd.read_csv(
            path,
            sep=delimiter,
            decimal=decimal_mark,
            index_col=0,
            dtype=str,
            keep_default_na=False,
            na_values=[""],
            engine="c",
        )
    except pd.errors.EmptyDataError:
        raise EldParseError(f"{path} is empty") from None
    except pd.errors.ParserError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise EldParseError(f"malformed row ({exc})", int(m.group(1)) if m else None) from None
    if df.shape[1] == 0:
        raise EldParseError(f"{path} has no client columns")
    if df.shape[0] == 0:
        raise EldParseError(f"{path} has a header but no data rows")

    values = np.empty(df.shape, dtype=float)
    for c, col in enumerate(df.columns):
        raw = df[col]
        if decimal_mark != ".":
            raw = raw.str.replace(decimal_mark, ".", regex=False)
        try:
            # numpy parses with correct rounding; pandas' fast parser may not
            values[:, c] = np.asarray(raw.fillna("nan").to_numpy(), dtype=float)
        except ValueError:
            num = pd.to_numeric(raw, errors="coerce")
            bad = (num.isna() & raw.notna()).to_numpy()
            r = int(np.argmax(bad))
            raise EldParseError(f"non-numeric value {df[col].iloc[r]!r} for client {col}", r + 2) from None

    missing = np.isnan(values)
    if missing.any():
        if fill is None:
            r, c = np.argwhere(missing)[0]
            raise EldParseError(
                f"missing value for client {df.columns[c]} (pass fill='zero' or 'previous')", int(r) + 2
            )
        if fill == "zero":
            values[missing] = 0.0
        else:
            values = pd.DataFrame(values).ffill().fillna(0.0).to_numpy()

    try:
        stamps = pd.to_datetime(df.index, format="%Y-%m-%d %H:%M:%S")
    except (ValueError, TypeError):
        stamps = pd.to_datetime(pd.Series(df.index), errors="coerce", format="mixed")
        if stamps.isna().any():
            bad = int(np.argmax(stamps.isna().to_numpy()))
            raise EldParseError(f"unparseable timestamp {df.index[bad]!r}", bad + 2) from None
    stamps = pd.DatetimeIndex(stamps)
    if len(stamps) > 1:
        steps = np.diff(stamps.asi8)
        off = np.flatnonzero(steps != SLOT.value)
        if off.size:
            r = int(off[0]) + 1
            raise EldParseError(
                f"timestamp {stamps[r]} does not follow {stamps[r - 1]} by 15 minutes", r + 2
            )

    clients = tuple(str(c) for c in df.columns)
    return LoadSeries(clients, stamps, np.ascontiguousarray(values.T))


def _format_value(x: float, decimal_mark: str) -> str:
    s = np.format_float_positional(x, unique=True, trim="-")
    return s.replace(".", decimal_mark) if decimal_mark != "." else s


def write_eld(series: LoadSeries, path, delimiter: str = ";", decimal_mark: str = ",") -> None:
    """Write a series back in the distribution layout (shortest round-trip digits)."""
    lines = [delimiter.join(['""'] + [f'"{c}"' for c in series.clients])]
    for t, stamp in enumerate(series.timestamps):
        cells = [_format_value(float(v), decimal_mark) for v in series.values[:, t]]
        lines.append(delimiter.join([f'"{stamp:%Y-%m-%d %H:%M:%S}"'] + cells))
    Path(path).write_text("\n".join(lines) + "\n")


def day_slots(series: LoadSeries, date):
    """Column indices of the 96 slots of ``date`` (00:00 up to 23:45)."""
    day = pd.Timestamp(date).normalize()
    expected = pd.date_range(day, periods=SLOTS_PER_DAY, freq=SLOT)
    pos = series.timestamps.get_indexer(expected)
    missing = expected[pos < 0]
    return pos, missing


def default_dates(series: LoadSeries, year: int = 2014) -> list:
    """First fully covered day of each quarter of ``year``."""
    dates = []
    for month in (1, 4, 7, 10):
        start = pd.Timestamp(year=year, month=month, day=1)
        for day in pd.date_range(start, start + pd.offsets.QuarterEnd(0), freq="D"):
            _, missing = day_slots(series, day)
            if len(missing) == 0:
                dates.append(day.date().isoformat())
                break
    if not dates:
        raise ValueError(f"series does not fully cover any day of {year}; pass dates explicitly")
    return dates


def daily_views(series: LoadSeries, dates, normalize: str = "none", drop_zero: bool = True) -> MultiViewDataset:
    """One view per calendar day: clients x 96 quarter-hour slots.

    Parameters
    ----------
    series : LoadSeries
    dates : sequence of date-like
        Repeats are allowed and produce identical views.
    normalize : {'none', 'zscore', 'max'}
        Per-client scaling computed over all selected days together.
    drop_zero : bool
        Drop clients that read zero on every selected day.

    Returns
    -------
    MultiViewDataset
        ``meta`` is the run manifest: dates, client count, dropped
        clients and normalisation.
    """
    if len(dates) == 0:
        raise ValueError("need at least one date")
    if normalize not in ("none", "zscore", "max"):
        raise ValueError(f"unknown normalisation {normalize!r}")
    blocks = []
    for d in dates:
        pos, missing = day_slots(series, d)
        if len(missing):
            shown = ", ".join(f"{t:%H:%M}" for t in missing[:8])
            more = "" if len(missing) <= 8 else f" and {len(missing) - 8} more"
            raise ValueError(f"date {pd.Timestamp(d).date()} is missing {len(missing)} slots: {shown}{more}")
        blocks.append(series.values[:, pos])

    stacked = np.concatenate(blocks, axis=1)
    keep = np.ones(len(series.clients), dtype=bool)
    dropped = []
    if drop_zero:
        keep = np.any(stacked != 0, axis=1)
        dropped = [c for c, k in zip(series.clients, keep) if not k]
        if dropped:
            logger.warning("dropping %d clients that are zero on every selected day", len(dropped))
    clients = tuple(c for c, k in zip(series.clients, keep) if k)
    blocks = [b[keep] for b in blocks]
    stacked = stacked[keep]

    if normalize == "zscore":
        mu = stacked.mean(axis=1, keepdims=True)
        sd = stacked.std(axis=1, keepdims=True)
        sd[sd == 0] = 1.0
        blocks = [(b - mu) / sd for b in blocks]
    elif normalize == "max":
        mx = np.abs(stacked).max(axis=1, keepdims=True)
        mx[mx == 0] = 1.0
        blocks = [b / mx for b in blocks]

    views = tuple(SampleMatrix(b, clients) for b in blocks)
    meta = {
        "dates": [str(pd.Timestamp(d).date()) for d in dates],
        "n_clients": len(clients),
        "dropped_clients": dropped,
        "normalization": normalize,
    }
    data = MultiViewDataset(views, clients, meta)
    assert all(v.row_ids == data.row_ids for v in data.views)
    return data
