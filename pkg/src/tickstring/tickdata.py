"""Tick ingestion, validation, and OHLC resampling.

The raw input is a CSV stream of ``timestamp,ask,bid`` rows (header optional,
timestamps either integer epoch milliseconds or ISO-8601). Parsed data lives
in a :class:`TickSeries`, an immutable column store shared by every other
module. Timestamps are kept as integer epoch milliseconds so downstream
time-difference arithmetic is exact.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ValidationError

__all__ = [
    "Tick",
    "TickSeries",
    "OhlcBar",
    "mid_price",
    "parse_ticks",
    "serialize_ticks",
    "resample_ohlc",
    "ohlc_to_csv",
]

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
_ONE_MS = timedelta(milliseconds=1)


@dataclass(frozen=True)
class Tick:
    """One bid/ask quote pair at an integer epoch-millisecond timestamp."""

    timestamp: int
    ask: float
    bid: float

    def __post_init__(self) -> None:
        if not (self.ask > 0.0 and self.bid > 0.0):
            raise ValidationError(
                f"non-positive quote at t={self.timestamp}: "
                f"ask={self.ask}, bid={self.bid}"
            )


def mid_price(tick: Tick) -> float:
    """Arithmetic mean of the ask and bid quotes."""
    return (tick.ask + tick.bid) / 2.0


class TickSeries:
    """Strictly time-ordered quote series backed by read-only numpy arrays.

    Instances are immutable after construction and safe to share across
    threads. Indexing with an integer returns a :class:`Tick`; slicing
    returns a new :class:`TickSeries` view.
    """

    __slots__ = ("timestamps", "asks", "bids", "symbol")

    def __init__(
        self,
        timestamps: Sequence[int] | np.ndarray,
        asks: Sequence[float] | np.ndarray,
        bids: Sequence[float] | np.ndarray,
        symbol: str = "",
        *,
        strict: bool = True,
    ) -> None:
        ts = np.ascontiguousarray(timestamps, dtype=np.int64)
        ask = np.ascontiguousarray(asks, dtype=np.float64)
        bid = np.ascontiguousarray(bids, dtype=np.float64)
        if ts.ndim != 1 or ask.shape != ts.shape or bid.shape != ts.shape:
            raise ValidationError("timestamp/ask/bid arrays must be 1-D and equal length")
        if ts.size == 0:
            raise ValidationError("empty tick series")
        if ts.size > 1 and not np.all(np.diff(ts) > 0):
            bad = int(np.argmax(np.diff(ts) <= 0)) + 1
            raise ValidationError(f"timestamps not strictly increasing at index {bad}")
        if not (np.all(ask > 0.0) and np.all(bid > 0.0)):
            raise ValidationError("prices must be strictly positive")
        if strict and np.any(ask < bid):
            bad = int(np.argmax(ask < bid))
            raise ValidationError(f"inverted quote (ask < bid) at index {bad}")
        for arr in (ts, ask, bid):
            arr.setflags(write=False)
        self.timestamps = ts
        self.asks = ask
        self.bids = bid
        self.symbol = symbol

    @classmethod
    def from_ticks(
        cls, ticks: Iterable[Tick], symbol: str = "", *, strict: bool = True
    ) -> "TickSeries":
        rows = list(ticks)
        return cls(
            [t.timestamp for t in rows],
            [t.ask for t in rows],
            [t.bid for t in rows],
            symbol,
            strict=strict,
        )

    def mids(self) -> np.ndarray:
        """Mid prices ``(ask + bid) / 2`` as a float array."""
        return (self.asks + self.bids) / 2.0

    def __len__(self) -> int:
        return int(self.timestamps.size)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return TickSeries(
                self.timestamps[index],
                self.asks[index],
                self.bids[index],
                self.symbol,
                strict=False,
            )
        i = int(index)
        return Tick(int(self.timestamps[i]), float(self.asks[i]), float(self.bids[i]))

    def __iter__(self) -> Iterator[Tick]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TickSeries):
            return NotImplemented
        return (
            self.symbol == other.symbol
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.asks, other.asks)
            and np.array_equal(self.bids, other.bids)
        )

    def __repr__(self) -> str:
        return (
            f"TickSeries(n={len(self)}, symbol={self.symbol!r}, "
            f"span_ms={int(self.timestamps[-1] - self.timestamps[0])})"
        )


@dataclass(frozen=True)
class OhlcBar:
    """Open/high/low/close prices (ask and bid sides) for one time bucket."""

    interval_start: int
    interval: int
    open_ask: float
    high_ask: float
    low_ask: float
    close_ask: float
    open_bid: float
    high_bid: float
    low_bid: float
    close_bid: float

    def __post_init__(self) -> None:
        for side in ("ask", "bid"):
            o = getattr(self, f"open_{side}")
            h = getattr(self, f"high_{side}")
            lo = getattr(self, f"low_{side}")
            c = getattr(self, f"close_{side}")
            if not (lo <= min(o, c) and max(o, c) <= h):
                raise ValidationError(f"inconsistent {side} OHLC in bar at {self.interval_start}")


def _parse_timestamp(field: str, row: int) -> int:
    """Epoch milliseconds from an integer or ISO-8601 string."""
    text = field.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        iso = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
        stamp = datetime.fromisoformat(iso)
    except ValueError:
        raise ValidationError(f"row {row}: unparseable timestamp {field!r}") from None
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return (stamp - _EPOCH) // _ONE_MS


def _iter_lines(source) -> Iterator[str]:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        yield from io.StringIO(source)
        return
    for line in source:
        yield line.decode("utf-8") if isinstance(line, bytes) else line


def parse_ticks(
    source,
    *,
    delimiter: str = ",",
    strict: bool = True,
    duplicate_policy: str = "last",
    symbol: str = "",
) -> TickSeries:
    """Parse a ``timestamp,ask,bid`` CSV stream into a validated TickSeries.

    ``source`` may be a str, bytes, or a text/binary file object. A header
    line is skipped when its first field does not parse as a timestamp.
    Rows sharing a timestamp collapse to the last one seen
    (``duplicate_policy="last"``) or raise (``"error"``); timestamps moving
    backwards always raise. With ``strict`` (the default) a row whose ask is
    below its bid is rejected as a crossed quote.
    """
    if duplicate_policy not in ("last", "error"):
        raise ValidationError(f"unknown duplicate policy {duplicate_policy!r}")
    times: list[int] = []
    asks: list[float] = []
    bids: list[float] = []
    first_row_seen = False
    for row, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split(delimiter)
        if len(fields) != 3:
            raise ValidationError(f"row {row}: expected 3 fields, got {len(fields)}")
        try:
            ts = _parse_timestamp(fields[0], row)
        except ValidationError:
            if not first_row_seen:
                first_row_seen = True
                continue  # header line
            raise
        first_row_seen = True
        try:
            ask = float(fields[1])
            bid = float(fields[2])
        except ValueError:
            raise ValidationError(f"row {row}: unparseable price in {line!r}") from None
        if not (np.isfinite(ask) and np.isfinite(bid)) or ask <= 0.0 or bid <= 0.0:
            raise ValidationError(f"row {row}: prices must be finite and positive")
        if strict and ask < bid:
            raise ValidationError(f"row {row}: inverted quote (ask {ask} < bid {bid})")
        if times:
            if ts < times[-1]:
                raise ValidationError(f"row {row}: non-monotone timestamp {ts}")
            if ts == times[-1]:
                if duplicate_policy == "error":
                    raise ValidationError(f"row {row}: duplicate timestamp {ts}")
                asks[-1] = ask
                bids[-1] = bid
                continue
        times.append(ts)
        asks.append(ask)
        bids.append(bid)
    if not times:
        raise ValidationError("empty input: no tick rows found")
    return TickSeries(times, asks, bids, symbol, strict=strict)


def serialize_ticks(series: TickSeries, stream=None) -> str | None:
    """Write a TickSeries as ``timestamp,ask,bid`` CSV (round-trips exactly).

    Prices are rendered with ``repr`` so every float survives a
    parse/serialize cycle bit-exactly. Returns the CSV text when ``stream``
    is None, otherwise writes to the stream.
    """
    out = io.StringIO() if stream is None else stream
    out.write("timestamp,ask,bid\n")
    for i in range(len(series)):
        out.write(
            f"{int(series.timestamps[i])},{float(series.asks[i])!r},{float(series.bids[i])!r}\n"
        )
    if stream is None:
        return out.getvalue()
    return None


def resample_ohlc(series: TickSeries, interval_ms: int) -> list[OhlcBar]:
    """Aggregate ticks into OHLC bars aligned to ``interval_ms`` boundaries.

    Buckets with no ticks are omitted. Within a bucket, open/close are the
    first/last tick and high/low are componentwise extrema of the ask and
    bid columns.
    """
    interval = int(interval_ms)
    if interval <= 0:
        raise ValidationError("resample interval must be positive")
    keys = series.timestamps // interval
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    ends = np.r_[starts[1:], len(series)] - 1
    high_ask = np.maximum.reduceat(series.asks, starts)
    low_ask = np.minimum.reduceat(series.asks, starts)
    high_bid = np.maximum.reduceat(series.bids, starts)
    low_bid = np.minimum.reduceat(series.bids, starts)
    bars = []
    for k, (s, e) in enumerate(zip(starts, ends)):
        bars.append(
            OhlcBar(
                interval_start=int(keys[s]) * interval,
                interval=interval,
                open_ask=float(series.asks[s]),
                high_ask=float(high_ask[k]),
                low_ask=float(low_ask[k]),
                close_ask=float(series.asks[e]),
                open_bid=float(series.bids[s]),
                high_bid=float(high_bid[k]),
                low_bid=float(low_bid[k]),
                close_bid=float(series.bids[e]),
            )
        )
    return bars


def ohlc_to_csv(bars: Iterable[OhlcBar], stream=None) -> str | None:
    """Render OHLC bars in the canonical column order."""
    out = io.StringIO() if stream is None else stream
    out.write(
        "interval_start,open_ask,high_ask,low_ask,close_ask,"
        "open_bid,high_bid,low_bid,close_bid\n"
    )
    for bar in bars:
        out.write(
            f"{bar.interval_start},{bar.open_ask!r},{bar.high_ask!r},"
            f"{bar.low_ask!r},{bar.close_ask!r},{bar.open_bid!r},"
            f"{bar.high_bid!r},{bar.low_bid!r},{bar.close_bid!r}\n"
        )
    if stream is None:
        return out.getvalue()
    return None
