"""String and brane window maps over bid/ask tick series.

Pipeline: ingest ticks -> map windows to string/brane amplitudes -> momentum
predictors and distribution statistics -> stability indicators (volatility,
angular momentum, slope/tension) -> deterministic backtest with risk
statistics and an ARMA comparison baseline.
"""

from .backtest import (
    ArmaModel,
    NavSeries,
    Objective,
    Order,
    OrderIntent,
    Side,
    StrategyConfig,
    TradeLedger,
    arma_fit,
    arma_forecast,
    arma_signals,
    execute,
    generate_signals,
    grid_search,
    invariant_regions,
    run_strategy,
)
from .errors import NumericContractError, TickStringError, ValidationError
from .predictor import (
    DistributionStats,
    MomentumSeries,
    RegularFnConfig,
    RegularFnFamily,
    distribution_stats,
    momentum_1d,
    momentum_2d,
    momentum_series,
    regular_fn_cs,
    regular_fn_d2,
)
from .risk import (
    ReturnSample,
    RiskReport,
    cornish_fisher_quantile,
    mvar_sharpe,
    normal_quantile,
    sharpe_ratio,
)
from .stability import (
    ConjugateMode,
    ConjugateSeries,
    SlopeReport,
    StabilityIndicators,
    angular_momentum,
    angular_momentum_series,
    conjugate_series,
    correlation_grid,
    dp_brane_tension,
    historical_volatility,
    momentum_distance,
    pearson_correlation,
    regge_slope,
    return_volatility,
    stability_sweep,
)
from .strmaps import (
    BraneAmplitude2D,
    MapConfig,
    MapKind,
    PriceSource,
    StringAmplitude1D,
    compute_map,
    map_d2,
    map_os1,
    map_os2,
    map_polarized,
    q_deform,
)
from .synth import random_walk_ticks
from .tickdata import (
    OhlcBar,
    Tick,
    TickSeries,
    mid_price,
    parse_ticks,
    resample_ohlc,
    serialize_ticks,
)

__version__ = "0.1.0"
