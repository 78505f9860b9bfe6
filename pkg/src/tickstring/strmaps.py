"""Window maps from tick prices to string and brane amplitude arrays.

Each map takes the ``l_s + 1`` ticks starting at an anchor index ``tau`` and
produces an amplitude array indexed by the intra-window coordinate ``h``.
All maps are built from relative returns, so scaling every price by a common
positive factor leaves the output unchanged. The two-endpoint map and the
brane map vanish identically on their window boundary (Dirichlet ends); the
one-endpoint map vanishes at ``h = 0`` only.

The deformation exponent ``q`` sharpens (q > 1) or flattens (q < 1) the
amplitude spectrum through the odd power transform
``f_q(x) = sign(x) * |x| ** q``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ValidationError
from .tickdata import TickSeries

__all__ = [
    "MapKind",
    "PriceSource",
    "MapConfig",
    "StringAmplitude1D",
    "BraneAmplitude2D",
    "q_deform",
    "map_os1",
    "map_os2",
    "map_polarized",
    "map_d2",
    "compute_map",
    "amplitude_to_csv",
]


class MapKind(str, Enum):
    """Which window map to apply."""

    OS1 = "os1"
    OS2 = "os2"
    POLARIZED = "pol"
    POLARIZED_SUBTRACTED = "pol-sub"
    D2 = "d2"


class PriceSource(str, Enum):
    """Price column feeding the single-series maps."""

    MID = "mid"
    ASK = "ask"
    BID = "bid"


@dataclass(frozen=True)
class MapConfig:
    """Window-map parameters: length, deformation exponent, kind, price column."""

    l_s: int
    q: float = 1.0
    kind: MapKind = MapKind.OS2
    price_source: PriceSource = PriceSource.MID

    def __post_init__(self) -> None:
        if int(self.l_s) != self.l_s or self.l_s < 2:
            raise ValidationError(f"string length l_s must be an integer >= 2, got {self.l_s}")
        if not self.q > 0.0:
            raise ValidationError(f"deformation exponent q must be > 0, got {self.q}")


@dataclass(frozen=True)
class StringAmplitude1D:
    """Amplitude array over h = 0..l_s for one anchor index."""

    tau: int
    values: np.ndarray

    @property
    def l_s(self) -> int:
        return int(self.values.shape[0]) - 1


@dataclass(frozen=True)
class BraneAmplitude2D:
    """Amplitude grid over (h1, h2) in [0, l_s]^2 for one anchor index."""

    tau: int
    values: np.ndarray

    @property
    def l_s(self) -> int:
        return int(self.values.shape[0]) - 1


def q_deform(x, q: float):
    """Odd power transform sign(x) * |x|**q; maps 0 to 0 for any q > 0.

    Accepts scalars or arrays. Odd and strictly increasing in x for fixed q.
    """
    if not q > 0.0:
        raise ValidationError(f"deformation exponent q must be > 0, got {q}")
    if q == 1.0:
        return x.copy() if isinstance(x, np.ndarray) else float(x)
    result = np.sign(x) * np.abs(x) ** q
    return result if isinstance(x, np.ndarray) else float(result)


def _check_window(series: TickSeries, tau: int, l_s: int) -> None:
    if tau < 0 or tau + l_s >= len(series):
        raise ValidationError(
            f"window [tau, tau + l_s] = [{tau}, {tau + l_s}] out of bounds "
            f"for series of length {len(series)}"
        )


def _prices(series: TickSeries, source: PriceSource) -> np.ndarray:
    if source is PriceSource.ASK:
        return series.asks
    if source is PriceSource.BID:
        return series.bids
    return series.mids()


def _window(series: TickSeries, tau: int, l_s: int, source: PriceSource) -> np.ndarray:
    _check_window(series, tau, l_s)
    return _prices(series, source)[tau : tau + l_s + 1]


def map_os1(series: TickSeries, tau: int, cfg: MapConfig) -> StringAmplitude1D:
    """One-endpoint map: deformed relative displacement from the anchor.

    ``values[h] = f_q((p(tau+h) - p(tau)) / p(tau+h))``; the h = 0 entry is
    identically zero.
    """
    p = _window(series, tau, cfg.l_s, cfg.price_source)
    return StringAmplitude1D(tau, q_deform((p - p[0]) / p, cfg.q))


def map_os2(series: TickSeries, tau: int, cfg: MapConfig) -> StringAmplitude1D:
    """Two-endpoint map: product of the opening-leg and closing-leg returns.

    ``values[h] = f_q(((p(tau+h) - p(tau)) / p(tau+h))
    * ((p(tau+l_s) - p(tau+h)) / p(tau+l_s)))``. Both window ends are
    structural zeros (Dirichlet boundary).
    """
    p = _window(series, tau, cfg.l_s, cfg.price_source)
    opening = (p - p[0]) / p
    closing = (p[-1] - p) / p[-1]
    return StringAmplitude1D(tau, q_deform(opening * closing, cfg.q))


def map_polarized(series: TickSeries, tau: int, cfg: MapConfig) -> StringAmplitude1D:
    """Spread-aware two-endpoint map pairing bid numerators with ask anchors.

    ``values[h] = f_q(((bid(tau+h) - ask(tau)) / p(tau+h))
    * ((bid(tau+l_s) - ask(tau+h)) / p(tau+l_s)))`` where ``p`` is the mid
    price. When ask == bid everywhere this reduces to :func:`map_os2`. The
    subtracted variant removes ``values[0]`` from every entry, restoring a
    zero at the left end.
    """
    _check_window(series, tau, cfg.l_s)
    sl = slice(tau, tau + cfg.l_s + 1)
    ask = series.asks[sl]
    bid = series.bids[sl]
    mid = (ask + bid) / 2.0
    first = (bid - ask[0]) / mid
    second = (bid[-1] - ask) / mid[-1]
    values = q_deform(first * second, cfg.q)
    if cfg.kind is MapKind.POLARIZED_SUBTRACTED:
        values = values - values[0]
    return StringAmplitude1D(tau, values)


def _d2_factors(
    series: TickSeries, tau: int, l_s: int
) -> tuple[np.ndarray, np.ndarray]:
    """Undeformed ask-leg (h1) and bid-leg (h2) factor arrays of the brane map."""
    _check_window(series, tau, l_s)
    sl = slice(tau, tau + l_s + 1)
    ask = series.asks[sl]
    bid = series.bids[sl]
    ask_factor = ((ask - ask[0]) / ask) * ((ask[-1] - ask) / ask[-1])
    bid_factor = ((bid[0] - bid) / bid[0]) * ((bid - bid[-1]) / bid)
    return ask_factor, bid_factor


def map_d2(series: TickSeries, tau: int, cfg: MapConfig) -> BraneAmplitude2D:
    """Brane map: deformed product of ask-leg (h1) and bid-leg (h2) factors.

    The ask factors mirror the two-endpoint map on the ask column; the bid
    factors carry the reversed orientation
    ``((bid(tau) - bid(tau+h2)) / bid(tau))
    * ((bid(tau+h2) - bid(tau+l_s)) / bid(tau+h2))``. All four grid edges
    are structural zeros.
    """
    ask_factor, bid_factor = _d2_factors(series, tau, cfg.l_s)
    return BraneAmplitude2D(tau, q_deform(np.outer(ask_factor, bid_factor), cfg.q))


def compute_map(
    series: TickSeries, tau: int, cfg: MapConfig
) -> StringAmplitude1D | BraneAmplitude2D:
    """Dispatch on ``cfg.kind``."""
    if cfg.kind is MapKind.OS1:
        return map_os1(series, tau, cfg)
    if cfg.kind is MapKind.OS2:
        return map_os2(series, tau, cfg)
    if cfg.kind in (MapKind.POLARIZED, MapKind.POLARIZED_SUBTRACTED):
        return map_polarized(series, tau, cfg)
    if cfg.kind is MapKind.D2:
        return map_d2(series, tau, cfg)
    raise ValidationError(f"unknown map kind {cfg.kind!r}")


def _map_batch(series: TickSeries, taus: np.ndarray, cfg: MapConfig) -> np.ndarray:
    """All 1-D amplitude rows for the given anchors as an (n, l_s+1) matrix.

    Vectorized equivalent of calling the per-anchor map at every tau; used
    by the sliding-window predictor loop.
    """
    if cfg.kind is MapKind.D2:
        raise ValidationError("brane map has no 1-D batch form")
    l_s = cfg.l_s
    if taus.size == 0:
        return np.empty((0, l_s + 1))
    lo, hi = int(taus.min()), int(taus.max())
    _check_window(series, lo, l_s)
    _check_window(series, hi, l_s)
    if cfg.kind in (MapKind.POLARIZED, MapKind.POLARIZED_SUBTRACTED):
        ask = np.lib.stride_tricks.sliding_window_view(series.asks, l_s + 1)[taus]
        bid = np.lib.stride_tricks.sliding_window_view(series.bids, l_s + 1)[taus]
        mid = (ask + bid) / 2.0
        first = (bid - ask[:, :1]) / mid
        second = (bid[:, -1:] - ask) / mid[:, -1:]
        values = q_deform(first * second, cfg.q)
        if cfg.kind is MapKind.POLARIZED_SUBTRACTED:
            values = values - values[:, :1]
        return values
    p = np.lib.stride_tricks.sliding_window_view(
        _prices(series, cfg.price_source), l_s + 1
    )[taus]
    opening = (p - p[:, :1]) / p
    if cfg.kind is MapKind.OS1:
        return q_deform(opening, cfg.q)
    closing = (p[:, -1:] - p) / p[:, -1:]
    return q_deform(opening * closing, cfg.q)


def _d2_factors_batch(
    series: TickSeries, taus: np.ndarray, cfg: MapConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Per-anchor ask-leg and bid-leg factor rows (undeformed)."""
    l_s = cfg.l_s
    if taus.size:
        _check_window(series, int(taus.min()), l_s)
        _check_window(series, int(taus.max()), l_s)
    ask = np.lib.stride_tricks.sliding_window_view(series.asks, l_s + 1)[taus]
    bid = np.lib.stride_tricks.sliding_window_view(series.bids, l_s + 1)[taus]
    ask_factor = ((ask - ask[:, :1]) / ask) * ((ask[:, -1:] - ask) / ask[:, -1:])
    bid_factor = ((bid[:, :1] - bid) / bid[:, :1]) * ((bid - bid[:, -1:]) / bid)
    return ask_factor, bid_factor


def amplitude_to_csv(
    amp: StringAmplitude1D | BraneAmplitude2D, stream=None
) -> str | None:
    """Dump one anchor's amplitudes as CSV (``h,value`` or ``h1,h2,value``)."""
    out = io.StringIO() if stream is None else stream
    if isinstance(amp, BraneAmplitude2D):
        out.write("h1,h2,value\n")
        n = amp.values.shape[0]
        for h1 in range(n):
            row = amp.values[h1]
            for h2 in range(n):
                out.write(f"{h1},{h2},{float(row[h2])!r}\n")
    else:
        out.write("h,value\n")
        for h, value in enumerate(amp.values):
            out.write(f"{h},{float(value)!r}\n")
    if stream is None:
        return out.getvalue()
    return None
