"""Seeded synthetic bid/ask tick generation.

A geometric random walk drives the mid price; ask and bid quotes sit half a
(possibly jittered) spread above and below it. Two optional features shape
the microstructure:

* volatility clustering: the per-step log volatility follows an AR(1)
  process with persistence ``vol_persistence`` and innovation scale
  ``vol_of_vol``, producing the slow regimes real rates exhibit;
* quote staleness: one side can quote off the previous tick's mid
  (``stale_side``), giving the ask and bid strings a systematic phase
  offset instead of being exact rescalings of each other.

Everything is driven by a single numpy Generator seeded explicitly, so a
given parameter set always yields the identical series.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .tickdata import TickSeries

__all__ = ["random_walk_ticks"]

DEFAULT_START_TIMESTAMP = 1_449_187_200_000  # 2015-12-04T00:00:00Z


def random_walk_ticks(
    n: int,
    seed: int,
    *,
    start_price: float = 1.0,
    drift: float = 0.0,
    volatility: float = 1e-3,
    spread: float = 1e-4,
    spread_jitter: float = 0.0,
    vol_persistence: float = 0.0,
    vol_of_vol: float = 0.0,
    stale_side: str | None = None,
    interval_ms: int = 60_000,
    start_timestamp: int = DEFAULT_START_TIMESTAMP,
    symbol: str = "SYN/SYN",
) -> TickSeries:
    """Generate ``n`` ticks of a seeded geometric random walk.

    ``drift`` and ``volatility`` act per step on the log mid price;
    ``spread`` is the relative full spread (0 makes ask equal bid);
    ``spread_jitter`` is the log-scale deviation of independent per-side
    half-spread noise. ``stale_side`` ("ask" or "bid") quotes that side off
    the previous mid, clamped so quotes never cross.
    """
    if n < 1:
        raise ValidationError(f"need at least 1 tick, got {n}")
    if not start_price > 0.0:
        raise ValidationError("start price must be positive")
    if volatility < 0.0 or spread < 0.0 or spread_jitter < 0.0:
        raise ValidationError("volatility, spread and jitter must be non-negative")
    if not 0.0 <= vol_persistence < 1.0:
        raise ValidationError("vol_persistence must lie in [0, 1)")
    if vol_of_vol < 0.0:
        raise ValidationError("vol_of_vol must be non-negative")
    if stale_side not in (None, "ask", "bid"):
        raise ValidationError(f"stale_side must be 'ask', 'bid' or None, got {stale_side!r}")
    if interval_ms <= 0:
        raise ValidationError("tick interval must be positive")

    rng = np.random.default_rng(seed)
    shocks = rng.standard_normal(n - 1) if n > 1 else np.empty(0)
    if vol_of_vol > 0.0:
        vol_shocks = rng.standard_normal(n - 1) if n > 1 else np.empty(0)
        log_scale = np.empty(n - 1)
        level = 0.0
        for i in range(n - 1):
            level = vol_persistence * level + vol_of_vol * vol_shocks[i]
            log_scale[i] = level
        sigma = volatility * np.exp(log_scale)
    else:
        sigma = np.full(n - 1, volatility)

    log_mid = np.empty(n)
    log_mid[0] = np.log(start_price)
    if n > 1:
        log_mid[1:] = log_mid[0] + np.cumsum(drift + sigma * shocks)
    mid = np.exp(log_mid)

    half = spread / 2.0
    if spread_jitter > 0.0:
        ask_noise = rng.standard_normal(n)
        bid_noise = rng.standard_normal(n)
        correction = 0.5 * spread_jitter * spread_jitter
        half_ask = half * np.exp(spread_jitter * ask_noise - correction)
        half_bid = half * np.exp(spread_jitter * bid_noise - correction)
    else:
        half_ask = np.full(n, half)
        half_bid = np.full(n, half)

    ask_mid = mid.copy()
    bid_mid = mid.copy()
    if stale_side == "ask":
        ask_mid[1:] = mid[:-1]
    elif stale_side == "bid":
        bid_mid[1:] = mid[:-1]
    ask = ask_mid * (1.0 + half_ask)
    bid = bid_mid * (1.0 - half_bid)
    np.maximum(ask, bid, out=ask)  # staleness must not cross the quotes

    timestamps = start_timestamp + np.arange(n, dtype=np.int64) * interval_ms
    return TickSeries(timestamps, ask, bid, symbol)
