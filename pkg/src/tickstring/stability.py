"""Stability indicators built from paired ask/bid strings.

Besides the classic historical volatility (standard deviation of one-step
relative returns over a trailing time window), this module provides:

* return volatility at the half-window scale: the population deviation of
  one-step returns over ``l_s / 2`` ticks,
* the conjugate coordinate obtained by time-integrating an amplitude array,
* the angular momentum: the antisymmetric sum pairing ask/bid two-endpoint
  amplitudes with each other's conjugates (a volatility proxy),
* the momentum distance between the ask and bid strings,
* the slope parameter / tension summary derived from mean absolute angular
  momentum, and the generalized p-brane tension formula,
* a plain Pearson product-moment correlation for indicator comparisons.

Natural units: the reciprocal slope/tension pair is reported with the
reduced-action constants set to one, and conjugate time steps are seconds.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import NumericContractError, ValidationError
from .strmaps import MapConfig, MapKind, PriceSource, StringAmplitude1D, map_os2, _map_batch
from .tickdata import TickSeries

__all__ = [
    "ConjugateMode",
    "ConjugateSeries",
    "StabilityIndicators",
    "SlopeReport",
    "return_volatility",
    "historical_volatility",
    "conjugate_series",
    "angular_momentum",
    "angular_momentum_series",
    "momentum_distance",
    "regge_slope",
    "dp_brane_tension",
    "pearson_correlation",
    "first_anchor_with_history",
    "stability_sweep",
    "correlation_grid",
    "indicators_to_csv",
    "slope_to_dict",
]

TWO_PI = 2.0 * math.pi


class ConjugateMode(str, Enum):
    """Recurrence variant for the conjugate coordinate.

    ALIGNED advances with the current amplitude over the step it spans, so
    the discrete derivative of the output reproduces the input exactly.
    LITERAL keeps the one-step index offset of the historical recurrence
    (previous amplitude times the previous step).
    """

    ALIGNED = "aligned"
    LITERAL = "literal"


@dataclass(frozen=True)
class ConjugateSeries:
    """Time-integrated amplitude X over h = 0..l_s; X(0) = 0."""

    tau: int
    values: np.ndarray
    mode: ConjugateMode


@dataclass(frozen=True)
class StabilityIndicators:
    """Per-anchor stability bundle."""

    tau: int
    return_vol: float
    angular_momentum: float
    momentum_distance: float


@dataclass(frozen=True)
class SlopeReport:
    """Slope parameter and tension summary over an analysis range.

    ``tension_T0`` is None when the mean absolute angular momentum is zero
    (the reciprocal is undefined).
    """

    mean_abs_angular_momentum: float
    alpha_prime: float
    tension_T0: float | None
    l_s: int


def return_volatility(series: TickSeries, tau: int, l_s: int) -> float:
    """Deviation of one-step relative returns over the half window l_s/2.

    Returns ``sqrt(r2 - r1**2)`` where ``r_m`` is the average of
    ``((p(tau+h) - p(tau+h-1)) / p(tau+h)) ** m`` over h = 1..l_s/2 and p is
    the mid price. Averaging makes the radicand the population variance of
    the window returns, hence never negative.
    """
    if l_s < 2 or l_s % 2 != 0:
        raise ValidationError(f"return volatility needs an even l_s >= 2, got {l_s}")
    half = l_s // 2
    if tau < 0 or tau + half >= len(series):
        raise ValidationError(
            f"window [tau, tau + l_s/2] = [{tau}, {tau + half}] out of bounds"
        )
    p = series.mids()[tau : tau + half + 1]
    r = (p[1:] - p[:-1]) / p[1:]
    r1 = float(np.mean(r))
    r2 = float(np.mean(r * r))
    return math.sqrt(max(r2 - r1 * r1, 0.0))


def historical_volatility(series: TickSeries, tau: int, window_ms: int) -> float:
    """Population deviation of one-step relative returns over a trailing window.

    The window covers ticks with timestamps in ``(t(tau) - window_ms, t(tau)]``
    and must contain at least two ticks.
    """
    if window_ms <= 0:
        raise ValidationError(f"volatility window must be positive, got {window_ms}")
    if tau < 0 or tau >= len(series):
        raise ValidationError(f"anchor {tau} out of bounds")
    t_end = int(series.timestamps[tau])
    start = int(np.searchsorted(series.timestamps, t_end - window_ms, side="right"))
    if tau - start + 1 < 2:
        raise ValidationError(
            f"trailing window of {window_ms} ms at anchor {tau} holds fewer than 2 ticks"
        )
    p = series.mids()[start : tau + 1]
    r = (p[1:] - p[:-1]) / p[1:]
    r1 = float(np.mean(r))
    r2 = float(np.mean(r * r))
    return math.sqrt(max(r2 - r1 * r1, 0.0))


def conjugate_series(
    amp: StringAmplitude1D,
    timestamps_ms: Sequence[int] | np.ndarray,
    mode: ConjugateMode = ConjugateMode.ALIGNED,
) -> ConjugateSeries:
    """Integrate an amplitude array against its tick timestamps.

    ``timestamps_ms`` supplies one epoch-millisecond stamp per coordinate;
    time steps enter in seconds. ALIGNED: ``X(h+1) = X(h) + P(h) * dt(h)``.
    LITERAL: ``X(h+1) = X(h) + P(h-1) * dt(h-1)`` with P(-1) taken as zero,
    truncated to the amplitude's length.
    """
    ts = np.asarray(timestamps_ms, dtype=np.int64)
    p = amp.values
    if ts.shape != p.shape:
        raise ValidationError("need exactly one timestamp per amplitude coordinate")
    if ts.size > 1 and not np.all(np.diff(ts) > 0):
        raise ValidationError("timestamps not strictly increasing")
    dt_s = np.diff(ts) / 1000.0
    x = np.zeros_like(p)
    if mode is ConjugateMode.ALIGNED:
        x[1:] = np.cumsum(p[:-1] * dt_s)
    elif mode is ConjugateMode.LITERAL:
        if p.size > 2:
            x[2:] = np.cumsum(p[:-2] * dt_s[:-1])
    else:
        raise ValidationError(f"unknown conjugate mode {mode!r}")
    return ConjugateSeries(amp.tau, x, mode)


def _ask_bid_amplitudes(
    series: TickSeries, tau: int, cfg: MapConfig
) -> tuple[np.ndarray, np.ndarray]:
    base = replace(cfg, kind=MapKind.OS2, price_source=PriceSource.ASK)
    p_ask = map_os2(series, tau, base).values
    p_bid = map_os2(series, tau, replace(base, price_source=PriceSource.BID)).values
    return p_ask, p_bid


def angular_momentum(
    series: TickSeries,
    tau: int,
    cfg: MapConfig,
    mode: ConjugateMode = ConjugateMode.ALIGNED,
) -> float:
    """Antisymmetric ask/bid pairing summed along the string.

    Builds the two-endpoint amplitudes of the ask and bid columns, their
    conjugates, and returns ``sum_h(P_ask * X_bid - P_bid * X_ask)``. Zero
    whenever ask and bid are proportional; flips sign under an ask/bid swap.
    """
    p_ask, p_bid = _ask_bid_amplitudes(series, tau, cfg)
    ts = series.timestamps[tau : tau + cfg.l_s + 1]
    x_ask = conjugate_series(StringAmplitude1D(tau, p_ask), ts, mode).values
    x_bid = conjugate_series(StringAmplitude1D(tau, p_bid), ts, mode).values
    return float(np.sum(p_ask * x_bid - p_bid * x_ask))


def angular_momentum_series(
    series: TickSeries,
    cfg: MapConfig,
    taus: Sequence[int] | np.ndarray | None = None,
    mode: ConjugateMode = ConjugateMode.ALIGNED,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`angular_momentum` over many anchors.

    Returns ``(taus, values)``. Equivalent to the per-anchor form; batched
    for the indicator and correlation sweeps.
    """
    if taus is None:
        last = len(series) - cfg.l_s
        if last <= 0:
            raise ValidationError("series too short for the requested string length")
        taus = np.arange(last, dtype=np.int64)
    else:
        taus = np.asarray(list(taus), dtype=np.int64)
    if taus.size == 0:
        raise ValidationError("empty anchor range")
    base = replace(cfg, kind=MapKind.OS2, price_source=PriceSource.ASK)
    p_ask = _map_batch(series, taus, base)
    p_bid = _map_batch(series, taus, replace(base, price_source=PriceSource.BID))
    windows = np.lib.stride_tricks.sliding_window_view(series.timestamps, cfg.l_s + 1)[taus]
    dt_s = np.diff(windows, axis=1) / 1000.0
    x_ask = np.zeros_like(p_ask)
    x_bid = np.zeros_like(p_bid)
    if mode is ConjugateMode.ALIGNED:
        x_ask[:, 1:] = np.cumsum(p_ask[:, :-1] * dt_s, axis=1)
        x_bid[:, 1:] = np.cumsum(p_bid[:, :-1] * dt_s, axis=1)
    elif mode is ConjugateMode.LITERAL:
        if p_ask.shape[1] > 2:
            x_ask[:, 2:] = np.cumsum(p_ask[:, :-2] * dt_s[:, :-1], axis=1)
            x_bid[:, 2:] = np.cumsum(p_bid[:, :-2] * dt_s[:, :-1], axis=1)
    else:
        raise ValidationError(f"unknown conjugate mode {mode!r}")
    values = np.sum(p_ask * x_bid - p_bid * x_ask, axis=1)
    return taus, values


def momentum_distance(series: TickSeries, tau: int, cfg: MapConfig) -> float:
    """Mean absolute gap between the ask and bid two-endpoint amplitudes."""
    p_ask, p_bid = _ask_bid_amplitudes(series, tau, cfg)
    return float(np.mean(np.abs(p_ask - p_bid)))


def regge_slope(am_values: Sequence[float] | np.ndarray, l_s: int) -> SlopeReport:
    """Slope parameter and tension from a set of angular momenta.

    ``alpha_prime = mean(|am|) / (2*pi*l_s**2)`` and
    ``tension_T0 = 1 / (2*pi*alpha_prime)``; the tension is reported absent
    when every angular momentum is zero.
    """
    values = np.asarray(am_values, dtype=np.float64)
    if values.size == 0:
        raise ValidationError("need at least one angular momentum value")
    if l_s < 2:
        raise ValidationError(f"string length must be >= 2, got {l_s}")
    mean_abs = float(np.mean(np.abs(values)))
    alpha_prime = mean_abs / (TWO_PI * l_s * l_s)
    tension = 1.0 / (TWO_PI * alpha_prime) if alpha_prime > 0.0 else None
    return SlopeReport(mean_abs, alpha_prime, tension, int(l_s))


def dp_brane_tension(p: int, g_s: float, l_s: float) -> float:
    """Generalized tension ``1 / (g_s * (2*pi)**p * l_s**(p+1))``."""
    if int(p) != p or p < 0:
        raise ValidationError(f"brane dimension p must be an integer >= 0, got {p}")
    if not (g_s > 0.0 and l_s > 0.0):
        raise ValidationError("coupling and string length must be positive")
    return 1.0 / (g_s * TWO_PI**p * l_s ** (p + 1))


def pearson_correlation(
    x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray
) -> float:
    """Product-moment correlation coefficient in [-1, 1].

    Raises :class:`NumericContractError` when either argument has zero
    variance.
    """
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValidationError("inputs must be 1-D and equally long")
    if xs.size < 2:
        raise ValidationError(f"need at least 2 samples, got {xs.size}")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sx = math.sqrt(float(np.mean(dx * dx)))
    sy = math.sqrt(float(np.mean(dy * dy)))
    if sx == 0.0 or sy == 0.0:
        raise NumericContractError("correlation undefined for zero-variance input")
    r = float(np.mean(dx * dy)) / (sx * sy)
    return min(1.0, max(-1.0, r))


def first_anchor_with_history(series: TickSeries, window_ms: int) -> int:
    """Smallest anchor whose trailing window holds at least two ticks."""
    ts = series.timestamps
    for tau in range(len(series)):
        start = int(np.searchsorted(ts, int(ts[tau]) - window_ms, side="right"))
        if tau - start + 1 >= 2:
            return tau
    raise ValidationError(f"no anchor has 2 ticks within a {window_ms} ms window")


def stability_sweep(
    series: TickSeries, cfg: MapConfig, window_ms: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-anchor indicator columns over every anchor where all are defined.

    Returns ``(taus, return_vol, hist_vol, angular_momentum)``. The anchor
    range starts once the trailing volatility window is populated and ends
    where the string window no longer fits.
    """
    if cfg.l_s % 2 != 0:
        raise ValidationError("stability sweep needs an even string length")
    tau_lo = first_anchor_with_history(series, window_ms)
    tau_hi = len(series) - cfg.l_s  # exclusive
    if tau_hi <= tau_lo:
        raise ValidationError("series too short for the requested string length")
    taus = np.arange(tau_lo, tau_hi, dtype=np.int64)
    _, am = angular_momentum_series(series, cfg, taus)
    rv = np.array([return_volatility(series, int(t), cfg.l_s) for t in taus])
    hv = np.array([historical_volatility(series, int(t), window_ms) for t in taus])
    return taus, rv, hv, am


def correlation_grid(
    series: TickSeries,
    ls_values: Sequence[int],
    window_ms_values: Sequence[int],
    q: float = 1.0,
    *,
    magnitude: bool = False,
) -> np.ndarray:
    """Correlation of angular momentum against historical volatility.

    Entry ``[i, j]`` pairs the angular momentum at string length
    ``ls_values[i]`` with the trailing volatility over
    ``window_ms_values[j]``, correlated across all anchors where both are
    defined. ``magnitude`` correlates ``|M|`` instead of the signed value.
    Undefined entries (zero variance) are NaN.
    """
    grid = np.full((len(ls_values), len(window_ms_values)), np.nan)
    for i, l_s in enumerate(ls_values):
        cfg = MapConfig(l_s=int(l_s), q=q, kind=MapKind.OS2)
        for j, window_ms in enumerate(window_ms_values):
            tau_lo = first_anchor_with_history(series, int(window_ms))
            tau_hi = len(series) - int(l_s)
            if tau_hi - tau_lo < 2:
                continue
            taus = np.arange(tau_lo, tau_hi, dtype=np.int64)
            _, am = angular_momentum_series(series, cfg, taus)
            hv = np.array(
                [historical_volatility(series, int(t), int(window_ms)) for t in taus]
            )
            if magnitude:
                am = np.abs(am)
            try:
                grid[i, j] = pearson_correlation(am, hv)
            except NumericContractError:
                continue
    return grid


def indicators_to_csv(
    rows: Sequence[tuple[int, float, float, float]], stream=None
) -> str | None:
    """Rows of ``tau_timestamp,return_vol,hist_vol,angular_momentum``."""
    out = io.StringIO() if stream is None else stream
    out.write("tau_timestamp,return_vol,hist_vol,angular_momentum\n")
    for stamp, rv, hv, am in rows:
        out.write(f"{int(stamp)},{float(rv)!r},{float(hv)!r},{float(am)!r}\n")
    if stream is None:
        return out.getvalue()
    return None


def slope_to_dict(report: SlopeReport) -> dict:
    """Flat JSON-ready mapping of a slope report."""
    return {
        "mean_abs_angular_momentum": report.mean_abs_angular_momentum,
        "alpha_prime": report.alpha_prime,
        "tension_T0": report.tension_T0,
        "l_s": report.l_s,
    }
