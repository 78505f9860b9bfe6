"""Momentum predictors and their distribution statistics.

The momentum of a window is the q-norm of pointwise deviations between its
amplitude array and a periodic benchmark surface (the "regular function"):

    M = ( mean_h |P(h) - F(h)|**q ) ** (1/q)

with the mean over all ``l_s + 1`` coordinates (or the full ``(l_s + 1)**2``
grid for brane amplitudes). Family ``NONE`` sets F to zero everywhere, the
unregularized momentum. Sweeping the anchor across a tick series yields the
per-anchor momentum series the trading layer consumes.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .strmaps import (
    BraneAmplitude2D,
    MapConfig,
    MapKind,
    StringAmplitude1D,
    _d2_factors_batch,
    _map_batch,
    q_deform,
)
from .tickdata import TickSeries

__all__ = [
    "RegularFnFamily",
    "RegularFnConfig",
    "MomentumSeries",
    "DistributionStats",
    "regular_fn_cs",
    "regular_fn_d2",
    "momentum_1d",
    "momentum_2d",
    "momentum_series",
    "distribution_stats",
    "momentum_to_csv",
    "stats_to_dict",
]


class RegularFnFamily(str, Enum):
    """Benchmark surface family; NONE means the zero function."""

    NONE = "none"
    CS_COSINE = "cs"
    D2_SINCOS = "d2"


@dataclass(frozen=True)
class RegularFnConfig:
    """Winding number and phases of the benchmark surface."""

    family: RegularFnFamily = RegularFnFamily.NONE
    m: int = 0
    phi: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self) -> None:
        if int(self.m) != self.m or self.m < 0:
            raise ValidationError(f"winding integer m must be >= 0, got {self.m}")


@dataclass(frozen=True)
class MomentumSeries:
    """Per-anchor momentum values plus the configuration that produced them."""

    taus: np.ndarray
    values: np.ndarray
    config: tuple[MapConfig, RegularFnConfig]

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class DistributionStats:
    """Mean, population standard deviation, and an equal-width histogram."""

    mu: float
    sigma: float
    edges: np.ndarray
    counts: np.ndarray


def regular_fn_cs(h: int, l_s: int, cfg: RegularFnConfig) -> float:
    """Raised-cosine benchmark: 0.5 * (1 + cos(2*pi*m*h/(l_s+1) + phi))."""
    angle = 2.0 * math.pi * cfg.m * h / (l_s + 1) + cfg.phi
    return 0.5 * (1.0 + math.cos(angle))


def regular_fn_d2(h1: int, h2: int, l_s: int, cfg: RegularFnConfig) -> float:
    """Two-coordinate benchmark: 0.5 * sin(a**2) * cos(b**2).

    ``a`` is the h1 angle ``2*pi*m*h1/(l_s+1) + phi`` and ``b`` the h2 angle
    ``2*pi*m*h2/(l_s+1) + epsilon``.
    """
    a = 2.0 * math.pi * cfg.m * h1 / (l_s + 1) + cfg.phi
    b = 2.0 * math.pi * cfg.m * h2 / (l_s + 1) + cfg.epsilon
    return 0.5 * math.sin(a * a) * math.cos(b * b)


def _curve_1d(l_s: int, cfg: RegularFnConfig) -> np.ndarray:
    if cfg.family is RegularFnFamily.NONE:
        return np.zeros(l_s + 1)
    if cfg.family is RegularFnFamily.CS_COSINE:
        h = np.arange(l_s + 1)
        angle = 2.0 * np.pi * cfg.m * h / (l_s + 1) + cfg.phi
        return 0.5 * (1.0 + np.cos(angle))
    raise ValidationError(f"family {cfg.family.value!r} is not a 1-D benchmark")


def _surface_2d(l_s: int, cfg: RegularFnConfig) -> np.ndarray:
    if cfg.family is RegularFnFamily.NONE:
        return np.zeros((l_s + 1, l_s + 1))
    if cfg.family is RegularFnFamily.D2_SINCOS:
        h = np.arange(l_s + 1)
        a = 2.0 * np.pi * cfg.m * h / (l_s + 1) + cfg.phi
        b = 2.0 * np.pi * cfg.m * h / (l_s + 1) + cfg.epsilon
        return 0.5 * np.outer(np.sin(a * a), np.cos(b * b))
    raise ValidationError(f"family {cfg.family.value!r} is not a 2-D benchmark")


def momentum_1d(amp: StringAmplitude1D, cfg: RegularFnConfig, q: float) -> float:
    """q-norm of |amplitude - benchmark| over the string coordinate."""
    if not q > 0.0:
        raise ValidationError(f"momentum norm exponent q must be > 0, got {q}")
    deviations = np.abs(amp.values - _curve_1d(amp.l_s, cfg))
    return float(np.mean(deviations**q) ** (1.0 / q))


def momentum_2d(amp: BraneAmplitude2D, cfg: RegularFnConfig, q: float) -> float:
    """q-norm of |amplitude - benchmark| over the full brane grid."""
    if not q > 0.0:
        raise ValidationError(f"momentum norm exponent q must be > 0, got {q}")
    deviations = np.abs(amp.values - _surface_2d(amp.l_s, cfg))
    return float(np.mean(deviations**q) ** (1.0 / q))


def default_anchor_range(series: TickSeries, l_s: int) -> range:
    """Every anchor whose window fits: 0 .. len(series) - l_s - 1."""
    last = len(series) - l_s
    if last <= 0:
        raise ValidationError(
            f"series of length {len(series)} has no full window of length {l_s + 1}"
        )
    return range(0, last)


def momentum_series(
    series: TickSeries,
    map_cfg: MapConfig,
    reg_cfg: RegularFnConfig,
    tau_range: range | Sequence[int] | None = None,
) -> MomentumSeries:
    """Momentum at each anchor in ``tau_range`` (default: all valid anchors).

    Deterministic: anchors are processed in ascending index order and the
    result depends only on the inputs.
    """
    if tau_range is None:
        tau_range = default_anchor_range(series, map_cfg.l_s)
    taus = np.asarray(list(tau_range), dtype=np.int64)
    if taus.size == 0:
        raise ValidationError("empty anchor range")
    if map_cfg.kind is MapKind.D2:
        ask_factor, bid_factor = _d2_factors_batch(series, taus, map_cfg)
        surface = _surface_2d(map_cfg.l_s, reg_cfg)
        inv_q = 1.0 / map_cfg.q
        values = np.empty(taus.size)
        for i in range(taus.size):
            grid = q_deform(np.outer(ask_factor[i], bid_factor[i]), map_cfg.q)
            values[i] = np.mean(np.abs(grid - surface) ** map_cfg.q) ** inv_q
    else:
        amplitudes = _map_batch(series, taus, map_cfg)
        curve = _curve_1d(map_cfg.l_s, reg_cfg)
        deviations = np.abs(amplitudes - curve[np.newaxis, :])
        values = np.mean(deviations**map_cfg.q, axis=1) ** (1.0 / map_cfg.q)
    return MomentumSeries(taus, values, (map_cfg, reg_cfg))


def distribution_stats(ms: MomentumSeries, bin_count: int = 50) -> DistributionStats:
    """Sample mean, population sigma, and equal-width histogram of momenta.

    An all-equal sample degenerates to a single bin with sigma = 0.
    """
    values = ms.values
    if values.size < 2:
        raise ValidationError(f"need at least 2 momenta for statistics, got {values.size}")
    if bin_count < 1:
        raise ValidationError(f"bin count must be >= 1, got {bin_count}")
    mu = float(np.mean(values))
    sigma = float(np.sqrt(np.mean((values - mu) ** 2)))
    lo = float(np.min(values))
    hi = float(np.max(values))
    if lo == hi:
        return DistributionStats(mu, 0.0, np.array([lo, hi]), np.array([values.size]))
    counts, edges = np.histogram(values, bins=bin_count, range=(lo, hi))
    return DistributionStats(mu, sigma, edges, counts)


def momentum_to_csv(ms: MomentumSeries, series: TickSeries, stream=None) -> str | None:
    """Rows of ``tau_timestamp,momentum``, one per anchor."""
    out = io.StringIO() if stream is None else stream
    out.write("tau_timestamp,momentum\n")
    stamps = series.timestamps[ms.taus]
    for i in range(len(ms)):
        out.write(f"{int(stamps[i])},{float(ms.values[i])!r}\n")
    if stream is None:
        return out.getvalue()
    return None


def stats_to_dict(stats: DistributionStats) -> dict:
    """JSON-ready ``{mu, sigma, bins: [{lo, hi, count}]}`` mapping."""
    bins = [
        {"lo": float(stats.edges[i]), "hi": float(stats.edges[i + 1]), "count": int(c)}
        for i, c in enumerate(stats.counts)
    ]
    return {"mu": stats.mu, "sigma": stats.sigma, "bins": bins}
