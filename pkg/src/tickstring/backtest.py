"""Deterministic trading simulation over tick data.

Signals come from runs of near-constant momentum ("invariant regions"): at
the end of each region an order is emitted in the direction of the region's
mid-price drift, executed once the window behind the signal has fully
closed. Fills are spread-aware (buys at ask, sells at bid), positions are
netted, and exits happen on take-profit/stop-loss touches or an opposite
signal. Net asset value marks open positions at the liquidation touch every
tick, so the spread cost of a round trip is visible immediately.

An autoregressive moving-average forecaster fitted by Yule-Walker (AR part)
and a two-stage long-AR regression (MA part) provides the comparison
baseline, and a deterministic grid search ranks strategy configurations.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import NumericContractError, ValidationError
from .predictor import MomentumSeries, RegularFnConfig, momentum_series
from .risk import ReturnSample, mvar_sharpe, sharpe_ratio
from .strmaps import MapConfig
from .tickdata import TickSeries

__all__ = [
    "Side",
    "OrderIntent",
    "Order",
    "TradeLedger",
    "NavSeries",
    "StrategyConfig",
    "ArmaModel",
    "Objective",
    "invariant_regions",
    "generate_signals",
    "execute",
    "arma_fit",
    "arma_forecast",
    "arma_signals",
    "run_strategy",
    "nav_objective",
    "grid_search",
    "strategy_sort_key",
    "ledger_to_csv",
    "nav_to_csv",
]


class Side(str, Enum):
    BUY = "buy"
    SELL = "sell"


class Objective(str, Enum):
    """Ranking criterion for the grid search."""

    FINAL_NAV = "final_nav"
    SHARPE = "sharpe"
    SHARPE_MVAR = "sharpe_mvar"


@dataclass(frozen=True)
class OrderIntent:
    """A desired order at a tick index, prior to execution and capping."""

    tau: int
    side: Side
    units: float


@dataclass(frozen=True)
class Order:
    """An executed fill; realized_pnl is nonzero only on position closes."""

    timestamp: int
    side: Side
    units: float
    fill_price: float
    realized_pnl: float = 0.0


@dataclass(frozen=True)
class TradeLedger:
    """Every fill of a run plus the final open-position state."""

    orders: tuple[Order, ...]
    final_units: float
    final_basis: float
    realized_total: float

    def unrealized_pnl(self, last_ask: float, last_bid: float) -> float:
        """Liquidation-value P&L of the open position, if any."""
        if self.final_units > 0.0:
            return self.final_units * last_bid - self.final_basis
        if self.final_units < 0.0:
            return self.final_basis - (-self.final_units) * last_ask
        return 0.0


@dataclass(frozen=True)
class NavSeries:
    """Account value in quote currency, marked at every tick."""

    timestamps: np.ndarray
    nav: np.ndarray


@dataclass(frozen=True)
class StrategyConfig:
    """Momentum-region strategy parameters.

    ``trade_altitude`` is the order size in base-currency units;
    ``band_epsilon`` the absolute momentum tolerance defining invariant
    regions; ``take_profit``/``stop_loss`` are relative price moves from the
    average entry price.
    """

    map_cfg: MapConfig
    reg_cfg: RegularFnConfig
    trade_altitude: float = 1000.0
    band_epsilon: float = 1e-4
    min_region_len: int = 5
    take_profit: float = 0.003
    stop_loss: float = 0.002
    max_position: float = 10_000.0

    def __post_init__(self) -> None:
        if not self.trade_altitude > 0.0:
            raise ValidationError("trade altitude must be positive")
        if not (self.take_profit > 0.0 and self.stop_loss > 0.0):
            raise ValidationError("take_profit and stop_loss must be positive")
        if not self.max_position > 0.0:
            raise ValidationError("max_position must be positive")
        if self.band_epsilon < 0.0:
            raise ValidationError("band_epsilon must be non-negative")
        if self.min_region_len < 1:
            raise ValidationError("min_region_len must be >= 1")


@dataclass(frozen=True)
class ArmaModel:
    """Fitted forecaster: AR and MA coefficients around a constant mean."""

    p: int
    q_ma: int
    ar_coeffs: tuple[float, ...]
    ma_coeffs: tuple[float, ...]
    noise_variance: float
    mean: float = 0.0


def invariant_regions(
    ms: MomentumSeries, cfg: StrategyConfig
) -> list[tuple[int, int]]:
    """Maximal anchor runs whose momentum range stays within the band.

    Scans left to right: a run extends while ``max(M) - min(M) <=
    band_epsilon`` and is reported once it can no longer grow, provided it
    spans at least ``min_region_len`` anchors. Returns inclusive
    ``(start_tau, end_tau)`` pairs, non-overlapping and ordered.
    """
    values = ms.values
    taus = ms.taus
    if values.size == 0:
        raise ValidationError("empty momentum series")
    regions: list[tuple[int, int]] = []
    start = 0
    run_min = run_max = float(values[0])
    for i in range(1, values.size + 1):
        if i < values.size:
            lo = min(run_min, float(values[i]))
            hi = max(run_max, float(values[i]))
            if hi - lo <= cfg.band_epsilon:
                run_min, run_max = lo, hi
                continue
        if i - start >= cfg.min_region_len:
            regions.append((int(taus[start]), int(taus[i - 1])))
        if i < values.size:
            start = i
            run_min = run_max = float(values[i])
    return regions


def generate_signals(
    series: TickSeries,
    regions: Iterable[tuple[int, int]],
    cfg: StrategyConfig,
) -> list[OrderIntent]:
    """One drift-following intent per region.

    The direction is the sign of the mid-price move between the region's
    first and last anchor ticks (no intent on zero drift). Execution is
    scheduled at the tick where the region-end window closes,
    ``end_tau + l_s``, so the signal never uses prices from after its own
    fill.
    """
    mids = series.mids()
    l_s = cfg.map_cfg.l_s
    intents: list[OrderIntent] = []
    for start_tau, end_tau in regions:
        fill_tau = end_tau + l_s
        if start_tau < 0 or fill_tau >= len(series):
            raise ValidationError(
                f"region ({start_tau}, {end_tau}) does not fit the series"
            )
        drift = float(mids[end_tau] - mids[start_tau])
        if drift > 0.0:
            intents.append(OrderIntent(fill_tau, Side.BUY, cfg.trade_altitude))
        elif drift < 0.0:
            intents.append(OrderIntent(fill_tau, Side.SELL, cfg.trade_altitude))
    return intents


def execute(
    series: TickSeries,
    intents: Iterable[OrderIntent],
    cfg: StrategyConfig,
    initial_cash: float,
) -> tuple[TradeLedger, NavSeries]:
    """Replay intents against the tick stream; fully deterministic.

    Per tick, in order: exit checks (take-profit / stop-loss at the touch),
    then scheduled intents, then the NAV mark. Buys fill at ask, sells at
    bid. An intent against an open opposite position closes the whole
    position and does nothing else; an intent in the position's direction
    (or from flat) adds up to ``max_position``. Positions are always closed
    in full, never partially.
    """
    if not initial_cash > 0.0:
        raise ValidationError("initial cash must be positive")
    n = len(series)
    schedule: dict[int, list[OrderIntent]] = {}
    for intent in sorted(intents, key=lambda it: it.tau):
        if intent.tau < 0 or intent.tau >= n:
            raise ValidationError(f"intent at tick {intent.tau} beyond series end")
        if not intent.units > 0.0:
            raise ValidationError("intent units must be positive")
        schedule.setdefault(intent.tau, []).append(intent)

    asks = series.asks
    bids = series.bids
    stamps = series.timestamps
    orders: list[Order] = []
    nav = np.empty(n)
    cash = float(initial_cash)
    units = 0.0  # signed base-currency position, > 0 long
    basis = 0.0  # cost of a long / proceeds of a short, in quote currency
    realized_total = 0.0

    def close_long(t: int, price: float) -> None:
        nonlocal cash, units, basis, realized_total
        proceeds = units * price
        pnl = proceeds - basis
        cash += proceeds
        realized_total += pnl
        orders.append(Order(int(stamps[t]), Side.SELL, units, price, pnl))
        units = 0.0
        basis = 0.0

    def close_short(t: int, price: float) -> None:
        nonlocal cash, units, basis, realized_total
        size = -units
        cost = size * price
        pnl = basis - cost
        cash -= cost
        realized_total += pnl
        orders.append(Order(int(stamps[t]), Side.BUY, size, price, pnl))
        units = 0.0
        basis = 0.0

    for t in range(n):
        ask = float(asks[t])
        bid = float(bids[t])
        if units > 0.0:
            entry = basis / units
            if bid >= entry * (1.0 + cfg.take_profit) or bid <= entry * (1.0 - cfg.stop_loss):
                close_long(t, bid)
        elif units < 0.0:
            entry = basis / -units
            if ask <= entry * (1.0 - cfg.take_profit) or ask >= entry * (1.0 + cfg.stop_loss):
                close_short(t, ask)
        for intent in schedule.get(t, ()):
            if intent.side is Side.BUY:
                if units < 0.0:
                    close_short(t, ask)
                    continue
                add = min(intent.units, cfg.max_position - units)
                if add > 0.0:
                    cash -= add * ask
                    basis += add * ask
                    units += add
                    orders.append(Order(int(stamps[t]), Side.BUY, add, ask, 0.0))
            else:
                if units > 0.0:
                    close_long(t, bid)
                    continue
                add = min(intent.units, cfg.max_position + units)
                if add > 0.0:
                    cash += add * bid
                    basis += add * bid
                    units -= add
                    orders.append(Order(int(stamps[t]), Side.SELL, add, bid, 0.0))
        if units > 0.0:
            nav[t] = cash + units * bid
        elif units < 0.0:
            nav[t] = cash + units * ask
        else:
            nav[t] = cash

    ledger = TradeLedger(tuple(orders), units, basis, realized_total)
    return ledger, NavSeries(stamps, nav)


def _autocovariances(x: np.ndarray, max_lag: int) -> np.ndarray:
    n = x.size
    return np.array([float(np.dot(x[k:], x[: n - k])) / n for k in range(max_lag + 1)])


def _yule_walker(gamma: np.ndarray, order: int) -> np.ndarray:
    matrix = np.empty((order, order))
    for i in range(order):
        for j in range(order):
            matrix[i, j] = gamma[abs(i - j)]
    try:
        phi = np.linalg.solve(matrix, gamma[1 : order + 1])
    except np.linalg.LinAlgError:
        raise NumericContractError("singular autocovariance system") from None
    if not np.all(np.isfinite(phi)):
        raise NumericContractError("singular autocovariance system")
    return phi


def _check_stationary(phi: np.ndarray) -> None:
    # Roots of 1 - phi_1 z - ... - phi_p z^p must lie outside the unit circle.
    coeffs = np.r_[-phi[::-1], 1.0]
    roots = np.roots(coeffs)
    if roots.size and np.min(np.abs(roots)) <= 1.0:
        raise NumericContractError("non-stationary AR fit rejected")


def arma_fit(returns: Sequence[float] | np.ndarray, p: int, q_ma: int = 0) -> ArmaModel:
    """Fit an ARMA(p, q) model to a return series.

    The AR part solves the Yule-Walker equations on biased sample
    autocovariances; a nonzero MA part is estimated by the two-stage
    long-AR regression (fit a long AR, extract residuals, regress on lagged
    values and lagged residuals). Fits whose AR polynomial has a root on or
    inside the unit circle are rejected.
    """
    if p < 1:
        raise ValidationError(f"AR order must be >= 1, got {p}")
    if q_ma < 0:
        raise ValidationError(f"MA order must be >= 0, got {q_ma}")
    x = np.asarray(returns, dtype=np.float64)
    if x.ndim != 1:
        raise ValidationError("returns must be a 1-D sequence")
    if x.size < 10 * (p + q_ma):
        raise ValidationError(
            f"need at least {10 * (p + q_ma)} observations for ARMA({p},{q_ma}), got {x.size}"
        )
    mean = float(np.mean(x))
    xc = x - mean
    if q_ma == 0:
        gamma = _autocovariances(xc, p)
        if gamma[0] == 0.0:
            raise NumericContractError("singular autocovariance system (constant series)")
        phi = _yule_walker(gamma, p)
        _check_stationary(phi)
        noise = float(gamma[0] - np.dot(phi, gamma[1 : p + 1]))
        return ArmaModel(p, 0, tuple(float(c) for c in phi), (), max(noise, 0.0), mean)

    long_order = min(max(20, 2 * (p + q_ma)), max(x.size // 10, p + q_ma + 1))
    gamma = _autocovariances(xc, long_order)
    if gamma[0] == 0.0:
        raise NumericContractError("singular autocovariance system (constant series)")
    phi_long = _yule_walker(gamma, long_order)
    resid = np.zeros_like(xc)
    for t in range(long_order, xc.size):
        resid[t] = xc[t] - float(np.dot(phi_long, xc[t - long_order : t][::-1]))
    start = long_order + max(p, q_ma)
    rows = xc.size - start
    if rows < p + q_ma + 1:
        raise ValidationError("sample too short for the second regression stage")
    design = np.empty((rows, p + q_ma))
    for i in range(p):
        design[:, i] = xc[start - 1 - i : xc.size - 1 - i]
    for j in range(q_ma):
        design[:, p + j] = resid[start - 1 - j : xc.size - 1 - j]
    target = xc[start:]
    coeffs, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < p + q_ma or not np.all(np.isfinite(coeffs)):
        raise NumericContractError("singular regression in the MA stage")
    phi = coeffs[:p]
    theta = coeffs[p:]
    _check_stationary(phi)
    noise = float(np.mean((target - design @ coeffs) ** 2))
    return ArmaModel(
        p,
        q_ma,
        tuple(float(c) for c in phi),
        tuple(float(c) for c in theta),
        noise,
        mean,
    )


def arma_forecast(
    model: ArmaModel, history: Sequence[float] | np.ndarray, horizon: int
) -> list[float]:
    """Iterated one-step conditional-mean forecasts after ``history``.

    Residuals over the history are reconstructed by running the model
    recursion with zero initial conditions; future innovations are their
    conditional mean, zero.
    """
    if horizon < 0:
        raise ValidationError(f"horizon must be >= 0, got {horizon}")
    if horizon == 0:
        return []
    hist = np.asarray(history, dtype=np.float64) - model.mean
    if hist.size < max(model.p, model.q_ma):
        raise ValidationError(
            f"history of {hist.size} is too short for ARMA({model.p},{model.q_ma})"
        )
    phi = model.ar_coeffs
    theta = model.ma_coeffs
    values = list(hist)
    residuals: list[float] = []
    for t in range(len(values)):
        pred = 0.0
        for i, coef in enumerate(phi, start=1):
            if t - i >= 0:
                pred += coef * values[t - i]
        for j, coef in enumerate(theta, start=1):
            if t - j >= 0:
                pred += coef * residuals[t - j]
        residuals.append(values[t] - pred)
    out: list[float] = []
    for _ in range(horizon):
        pred = 0.0
        for i, coef in enumerate(phi, start=1):
            pred += coef * values[-i]
        for j, coef in enumerate(theta, start=1):
            pred += coef * residuals[-j]
        values.append(pred)
        residuals.append(0.0)
        out.append(float(pred + model.mean))
    return out


def arma_signals(
    series: TickSeries,
    cfg: StrategyConfig,
    *,
    p: int = 2,
    q_ma: int = 1,
    warmup: int = 500,
    stride: int = 1,
    threshold: float = 0.0,
    context: int = 64,
) -> list[OrderIntent]:
    """Forecast-sign intents from an ARMA model fitted on a warmup prefix.

    The model is fitted once on the first ``warmup`` one-step mid returns;
    afterwards every ``stride``-th tick emits a buy (sell) intent when the
    one-step forecast exceeds ``threshold`` (falls below ``-threshold``).
    """
    if warmup < 10 * (p + q_ma):
        raise ValidationError("warmup too short for the requested ARMA orders")
    mids = series.mids()
    if len(series) < warmup + 2:
        raise ValidationError("series too short for the ARMA warmup")
    returns = (mids[1:] - mids[:-1]) / mids[1:]
    model = arma_fit(returns[:warmup], p, q_ma)
    window = max(model.p, model.q_ma) + context
    intents: list[OrderIntent] = []
    for t in range(warmup + 1, len(series), stride):
        known = returns[max(0, t - window) : t]
        forecast = arma_forecast(model, known, 1)[0]
        if forecast > threshold:
            intents.append(OrderIntent(t, Side.BUY, cfg.trade_altitude))
        elif forecast < -threshold:
            intents.append(OrderIntent(t, Side.SELL, cfg.trade_altitude))
    return intents


def strategy_sort_key(cfg: StrategyConfig) -> tuple:
    """Lexicographic key over all strategy fields; the deterministic tie-break."""
    return (
        cfg.map_cfg.kind.value,
        cfg.map_cfg.l_s,
        cfg.map_cfg.q,
        cfg.map_cfg.price_source.value,
        cfg.reg_cfg.family.value,
        cfg.reg_cfg.m,
        cfg.reg_cfg.phi,
        cfg.reg_cfg.epsilon,
        cfg.trade_altitude,
        cfg.band_epsilon,
        cfg.min_region_len,
        cfg.take_profit,
        cfg.stop_loss,
        cfg.max_position,
    )


def run_strategy(
    series: TickSeries, cfg: StrategyConfig, initial_cash: float
) -> tuple[TradeLedger, NavSeries]:
    """Momentum pipeline end to end: momenta, regions, signals, execution."""
    ms = momentum_series(series, cfg.map_cfg, cfg.reg_cfg)
    regions = invariant_regions(ms, cfg)
    intents = generate_signals(series, regions, cfg)
    return execute(series, intents, cfg, initial_cash)


def nav_objective(nav: NavSeries, objective: Objective) -> float | None:
    """Score a NAV path; None when the statistic is undefined (flat NAV)."""
    if objective is Objective.FINAL_NAV:
        return float(nav.nav[-1])
    returns = np.diff(nav.nav) / nav.nav[:-1]
    try:
        sample = ReturnSample(tuple(returns))
        if objective is Objective.SHARPE:
            return sharpe_ratio(sample)
        return mvar_sharpe(sample).sharpe_mvar
    except (NumericContractError, ValidationError):
        return None


def grid_search(
    series: TickSeries,
    configs: Sequence[StrategyConfig],
    objective: Objective = Objective.FINAL_NAV,
    *,
    initial_cash: float = 100_000.0,
    max_workers: int | None = None,
) -> list[tuple[StrategyConfig, float | None]]:
    """Evaluate every config and rank them, best first.

    Ranking is deterministic: descending objective value, undefined values
    last, ties broken by the lexicographic field order of the config.
    Evaluations are independent and may run concurrently; the ranking does
    not depend on worker count.
    """
    configs = list(configs)
    if not configs:
        raise ValidationError("empty strategy grid")

    def evaluate(cfg: StrategyConfig) -> float | None:
        _, nav = run_strategy(series, cfg, initial_cash)
        return nav_objective(nav, objective)

    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            values = list(pool.map(evaluate, configs))
    else:
        values = [evaluate(cfg) for cfg in configs]

    def rank_key(pair: tuple[StrategyConfig, float | None]):
        cfg, value = pair
        if value is None:
            return (1, 0.0, strategy_sort_key(cfg))
        return (0, -value, strategy_sort_key(cfg))

    return sorted(zip(configs, values), key=rank_key)


def ledger_to_csv(ledger: TradeLedger, stream=None) -> str | None:
    """Rows of ``timestamp,side,units,fill_price,realized_pnl``."""
    out = io.StringIO() if stream is None else stream
    out.write("timestamp,side,units,fill_price,realized_pnl\n")
    for order in ledger.orders:
        out.write(
            f"{order.timestamp},{order.side.value},{order.units!r},"
            f"{order.fill_price!r},{order.realized_pnl!r}\n"
        )
    if stream is None:
        return out.getvalue()
    return None


def nav_to_csv(nav: NavSeries, stream=None) -> str | None:
    """Rows of ``timestamp,nav``."""
    out = io.StringIO() if stream is None else stream
    out.write("timestamp,nav\n")
    for i in range(nav.nav.size):
        out.write(f"{int(nav.timestamps[i])},{float(nav.nav[i])!r}\n")
    if stream is None:
        return out.getvalue()
    return None
