"""Time-series container, CSV ingestion, per-channel min-max scaling, detrending."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import datetime

import numpy as np

__all__ = [
    "TimeSeries",
    "ScalingParams",
    "load_csv",
    "minmax_scale",
    "inverse_scale",
    "detrend",
]


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """A T x D matrix of real observations, one row per time step.

    Timestamps and channel names are carried as metadata only; every
    algorithm in this package operates on integer index time.
    """

    values: np.ndarray
    timestamps: tuple | None = None
    channel_names: tuple[str, ...] | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {values.shape}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"need at least one row and one channel, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

        if self.timestamps is not None:
            stamps = tuple(self.timestamps)
            if len(stamps) != values.shape[0]:
                raise ValueError(f"{len(stamps)} timestamps for {values.shape[0]} rows")
            for a, b in zip(stamps, stamps[1:]):
                if not a < b:
                    raise ValueError("timestamps must be strictly increasing")
            object.__setattr__(self, "timestamps", stamps)

        if self.channel_names is not None:
            names = tuple(str(n) for n in self.channel_names)
            if len(names) != values.shape[1]:
                raise ValueError(f"{len(names)} channel names for {values.shape[1]} channels")
            object.__setattr__(self, "channel_names", names)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_channels(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class ScalingParams:
    """Per-channel (min, max) recorded when a series was min-max scaled."""

    minima: np.ndarray
    maxima: np.ndarray

    def __post_init__(self):
        minima = np.atleast_1d(np.asarray(self.minima, dtype=float))
        maxima = np.atleast_1d(np.asarray(self.maxima, dtype=float))
        if minima.shape != maxima.shape or minima.ndim != 1:
            raise ValueError("minima and maxima must be 1-D and of equal length")
        if np.any(minima > maxima):
            raise ValueError("channel minimum exceeds maximum")
        for name, arr in (("minima", minima), ("maxima", maxima)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_channels(self) -> int:
        return self.minima.shape[0]


def _parse_timestamp(cell: str, row: int):
    text = cell.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(text)
    except ValueError:
        raise ValueError(
            f"row {row}: timestamp {text!r} is neither an integer nor ISO-8601"
        ) from None


def load_csv(source, has_header: bool = False, timestamp_column: int | str | None = None) -> TimeSeries:
    """Parse an RFC-4180 CSV byte stream into a TimeSeries.

    Parameters
    ----------
    source : bytes or binary/text file object or str
        CSV content, UTF-8 encoded. All non-timestamp cells must parse as
        real numbers (decimal point '.', no thousands separators).
    has_header : bool
        When true the first row supplies channel names.
    timestamp_column : int or str, optional
        Column (0-based index, or name when a header is present) holding
        timestamps, ISO-8601 or integer.
    """
    if isinstance(source, (bytes, bytearray)):
        text = bytes(source).decode("utf-8")
    elif isinstance(source, str):
        text = source
    elif hasattr(source, "read"):
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, (bytes, bytearray)) else raw
    else:
        raise TypeError(f"unsupported CSV source type: {type(source).__name__}")

    rows = [row for row in csv.reader(io.StringIO(text)) if row]
    if not rows:
        raise ValueError("empty CSV: no rows found")

    header: list[str] | None = None
    if has_header:
        header = [cell.strip() for cell in rows[0]]
        rows = rows[1:]
        if not rows:
            raise ValueError("empty CSV: header present but no data rows")

    width = len(rows[0])
    ts_index: int | None = None
    if timestamp_column is not None:
        if isinstance(timestamp_column, str):
            if header is None:
                raise ValueError("timestamp_column by name requires has_header=True")
            try:
                ts_index = header.index(timestamp_column)
            except ValueError:
                raise ValueError(f"no column named {timestamp_column!r} in header") from None
        else:
            ts_index = int(timestamp_column)
            if not 0 <= ts_index < width:
                raise ValueError(f"timestamp column index {ts_index} out of range for {width} columns")
    if width - (0 if ts_index is None else 1) < 1:
        raise ValueError("CSV has no data columns besides the timestamp column")

    data: list[list[float]] = []
    stamps: list = []
    for r, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ValueError(f"row {r}: expected {width} columns, found {len(row)} (ragged CSV)")
        record = []
        for c, cell in enumerate(row):
            if c == ts_index:
                stamps.append(_parse_timestamp(cell, r))
                continue
            try:
                record.append(float(cell.strip()))
            except ValueError:
                raise ValueError(
                    f"row {r}, column {c + 1}: cannot parse {cell.strip()!r} as a number"
                ) from None
        data.append(record)

    names = None
    if header is not None:
        names = tuple(h for i, h in enumerate(header) if i != ts_index)
    return TimeSeries(
        values=np.array(data, dtype=float),
        timestamps=tuple(stamps) if stamps else None,
        channel_names=names,
    )


def minmax_scale(ts: TimeSeries) -> tuple[TimeSeries, ScalingParams]:
    """Map each channel affinely onto [0, 1]; constant channels map to zeros.

    Returns the scaled series and the per-channel (min, max) needed to invert.
    """
    minima = ts.values.min(axis=0)
    maxima = ts.values.max(axis=0)
    span = maxima - minima
    safe = np.where(span > 0, span, 1.0)
    scaled = np.where(span > 0, (ts.values - minima) / safe, 0.0)
    out = TimeSeries(scaled, timestamps=ts.timestamps, channel_names=ts.channel_names)
    return out, ScalingParams(minima=minima, maxima=maxima)


def inverse_scale(ts: TimeSeries, params: ScalingParams) -> TimeSeries:
    """Undo :func:`minmax_scale`. Constant channels come back as their recorded min."""
    if ts.n_channels != params.n_channels:
        raise ValueError(
            f"series has {ts.n_channels} channels but params cover {params.n_channels}"
        )
    span = params.maxima - params.minima
    values = ts.values * span + params.minima
    return TimeSeries(values, timestamps=ts.timestamps, channel_names=ts.channel_names)


def detrend(ts: TimeSeries, method: str = "linear", degree: int | None = None) -> TimeSeries:
    """Remove a per-channel trend.

    ``linear`` and ``polynomial`` subtract the least-squares polynomial fit
    over index time; ``difference`` takes the first difference (length T-1).
    ``degree`` applies to ``polynomial`` only (default 2).
    """
    if method == "difference":
        if ts.n_samples < 2:
            raise ValueError("difference detrend needs at least 2 samples")
        values = np.diff(ts.values, axis=0)
        stamps = ts.timestamps[1:] if ts.timestamps is not None else None
        return TimeSeries(values, timestamps=stamps, channel_names=ts.channel_names)

    if method == "linear":
        deg = 1
    elif method == "polynomial":
        deg = 2 if degree is None else int(degree)
        if deg < 1:
            raise ValueError("polynomial degree must be >= 1")
    else:
        raise ValueError(f"unknown detrend method {method!r}")

    if ts.n_samples < deg + 2:
        raise ValueError(f"degree-{deg} detrend needs at least {deg + 2} samples, got {ts.n_samples}")

    # Fit on an index mapped to [-1, 1] to keep the Vandermonde system well conditioned.
    t = np.arange(ts.n_samples, dtype=float)
    x = 2.0 * t / max(ts.n_samples - 1, 1) - 1.0
    coeffs = np.polynomial.polynomial.polyfit(x, ts.values, deg)
    fitted = np.polynomial.polynomial.polyval(x, coeffs).T
    return TimeSeries(ts.values - fitted, timestamps=ts.timestamps, channel_names=ts.channel_names)
