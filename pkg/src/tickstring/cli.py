"""Command-line orchestrator: ticks -> maps -> predictors -> indicators -> backtest.

Four subcommands cover the pipeline: ``synth`` (seeded synthetic tick data),
``momentum`` (per-anchor momenta plus distribution statistics),
``stability`` (indicator sweep, slope/tension report, correlation grid) and
``backtest`` (single strategy, four-model comparison recipe, or grid
search). Every command reads an optional INI config, applies explicit flags
on top, and writes the fully resolved configuration next to its outputs so
a run can be reproduced from that file alone. Report paths render their
matplotlib figures alongside the delimited output unless ``--no-figures``
is given.

Exit codes: 0 success, 1 I/O failure, 2 validation failure, 3 numeric
contract violation.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .backtest import (
    Objective,
    StrategyConfig,
    arma_signals,
    execute,
    generate_signals,
    invariant_regions,
    ledger_to_csv,
    nav_to_csv,
)
from .config import (
    build_map_config,
    build_reg_config,
    build_strategy_config,
    dump_ini,
    load_grid_file,
    load_ini,
)
from .errors import NumericContractError, ValidationError
from .predictor import (
    RegularFnFamily,
    distribution_stats,
    momentum_series,
    momentum_to_csv,
    stats_to_dict,
)
from .risk import ReturnSample, mvar_sharpe, risk_to_dict
from .stability import (
    correlation_grid,
    regge_slope,
    slope_to_dict,
    stability_sweep,
    indicators_to_csv,
)
from .strmaps import MapConfig, MapKind, PriceSource, amplitude_to_csv, compute_map
from .synth import random_walk_ticks
from .tickdata import parse_ticks, serialize_ticks

EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3

_MAP_DEFAULTS = {"kind": "os2", "ls": "100", "q": "1.0", "price_source": "mid"}
_REG_DEFAULTS = {"family": "none", "m": "0", "phi": "0.0", "epsilon": "0.0"}
_STRATEGY_DEFAULTS = {
    "trade_altitude": "1000",
    "band_epsilon": "auto",
    "min_region_len": "5",
    "take_profit": "0.003",
    "stop_loss": "0.002",
    "max_position": "10000",
}
_ARMA_DEFAULTS = {
    "arma_p": "2",
    "arma_q": "1",
    "arma_warmup": "500",
    "arma_stride": "10",
    "arma_threshold": "0.0",
}
_SYNTH_DEFAULTS = {
    "n": "10000",
    "start_price": "1.0",
    "drift": "0.0",
    "volatility": "0.001",
    "spread": "0.0001",
    "spread_jitter": "0.0",
    "vol_persistence": "0.0",
    "vol_of_vol": "0.0",
    "stale_side": "none",
    "interval_ms": "60000",
    "symbol": "SYN/SYN",
    "filename": "ticks.csv",
}


def _fail(code: int, message) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (FileNotFoundError, IsADirectoryError, PermissionError, OSError) as exc:
            _fail(EXIT_IO, exc)
        except NumericContractError as exc:
            _fail(EXIT_NUMERIC, exc)
        except (ValidationError, ValueError) as exc:
            _fail(EXIT_VALIDATION, exc)

    return wrapper


def _resolve(defaults: dict, file_section: dict, overrides: dict) -> dict:
    """defaults <- config file <- explicit CLI flags, all as strings."""
    resolved = dict(defaults)
    resolved.update(file_section)
    for key, value in overrides.items():
        if value is not None:
            resolved[key] = value.value if hasattr(value, "value") else repr(value) if isinstance(value, float) else str(value)
    return resolved


def _load_series(path: str, strict: bool):
    with open(path, "rb") as handle:
        return parse_ticks(handle, strict=strict, symbol=Path(path).stem)


def _prepare_output(output_dir: str) -> Path:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
    click.echo(f"wrote {path}")


def _write_json(path: Path, payload) -> None:
    _write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _int_list(raw: str, key: str) -> list[int]:
    try:
        values = [int(part) for part in str(raw).split(",") if part.strip()]
    except ValueError:
        raise ValidationError(f"bad integer list for {key}: {raw!r}") from None
    if not values:
        raise ValidationError(f"empty list for {key}")
    return values


@click.group()
@click.version_option(version=__version__, prog_name="tickstring")
def main() -> None:
    """String/brane maps, momentum predictors and backtests over tick data."""


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------


@main.command()
@click.option("--output-dir", required=True, help="Directory for ticks.csv and the resolved config.")
@click.option("--config", "config_path", default=None, help="INI file with a [synth] section.")
@click.option("--seed", type=int, default=None, help="Random seed (required here or in the config).")
@click.option("--n", type=int, default=None, help="Number of ticks.")
@click.option("--start-price", type=float, default=None)
@click.option("--drift", type=float, default=None, help="Per-step log drift.")
@click.option("--vol", "volatility", type=float, default=None, help="Per-step log volatility.")
@click.option("--spread", type=float, default=None, help="Relative full spread.")
@click.option("--spread-jitter", type=float, default=None, help="Log-scale sigma of per-side half-spread noise.")
@click.option("--vol-persistence", type=float, default=None, help="AR(1) persistence of log volatility.")
@click.option("--vol-of-vol", type=float, default=None, help="Innovation scale of log volatility.")
@click.option("--stale-side", type=click.Choice(["none", "ask", "bid"]), default=None)
@click.option("--interval-ms", type=int, default=None)
@click.option("--symbol", default=None)
@click.option("--filename", default=None, help="Output CSV name inside the directory.")
@_guarded
def synth(output_dir, config_path, seed, n, start_price, drift, volatility, spread,
          spread_jitter, vol_persistence, vol_of_vol, stale_side, interval_ms,
          symbol, filename):
    """Write a seeded geometric-random-walk tick file."""
    file_cfg = load_ini(config_path) if config_path else {}
    section = _resolve(
        _SYNTH_DEFAULTS,
        file_cfg.get("synth", {}),
        {
            "seed": seed,
            "n": n,
            "start_price": start_price,
            "drift": drift,
            "volatility": volatility,
            "spread": spread,
            "spread_jitter": spread_jitter,
            "vol_persistence": vol_persistence,
            "vol_of_vol": vol_of_vol,
            "stale_side": stale_side,
            "interval_ms": interval_ms,
            "symbol": symbol,
            "filename": filename,
        },
    )
    if "seed" not in section:
        raise ValidationError("a seed is required (flag --seed or [synth] seed)")
    side = section["stale_side"]
    series = random_walk_ticks(
        int(section["n"]),
        int(section["seed"]),
        start_price=float(section["start_price"]),
        drift=float(section["drift"]),
        volatility=float(section["volatility"]),
        spread=float(section["spread"]),
        spread_jitter=float(section["spread_jitter"]),
        vol_persistence=float(section["vol_persistence"]),
        vol_of_vol=float(section["vol_of_vol"]),
        stale_side=None if side == "none" else side,
        interval_ms=int(section["interval_ms"]),
        symbol=section["symbol"],
    )
    out = _prepare_output(output_dir)
    _write(out / section["filename"], serialize_ticks(series))
    _write(out / "run_config.ini", dump_ini({"synth": section}))


# ---------------------------------------------------------------------------
# momentum
# ---------------------------------------------------------------------------

_map_options = [
    click.option("--ls", type=int, default=None, help="String length in ticks."),
    click.option("--q", "q_exp", type=float, default=None, help="Deformation exponent."),
    click.option("--map", "map_kind", type=click.Choice([k.value for k in MapKind]), default=None),
    click.option("--price-source", type=click.Choice([s.value for s in PriceSource]), default=None),
    click.option("--regfn", type=click.Choice([f.value for f in RegularFnFamily]), default=None),
    click.option("--m", "m_winding", type=int, default=None, help="Winding integer of the benchmark."),
    click.option("--phi", type=float, default=None, help="First benchmark phase."),
    click.option("--epsilon", type=float, default=None, help="Second benchmark phase (brane only)."),
]


def _with_options(options):
    def decorate(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn

    return decorate


def _resolve_map_reg(file_cfg, ls, q_exp, map_kind, price_source, regfn, m_winding, phi, epsilon):
    map_section = _resolve(
        _MAP_DEFAULTS,
        file_cfg.get("map", {}),
        {"ls": ls, "q": q_exp, "kind": map_kind, "price_source": price_source},
    )
    reg_section = _resolve(
        _REG_DEFAULTS,
        file_cfg.get("regfn", {}),
        {"family": regfn, "m": m_winding, "phi": phi, "epsilon": epsilon},
    )
    return map_section, reg_section


@main.command()
@click.option("--input", "input_path", required=True, help="Tick CSV file.")
@click.option("--output-dir", required=True)
@click.option("--config", "config_path", default=None)
@_with_options(_map_options)
@click.option("--bins", type=int, default=None, help="Histogram bin count.")
@click.option("--dump-anchor", type=int, default=None, help="Also dump this anchor's amplitude array.")
@click.option("--figures/--no-figures", default=None, help="Render figures next to the delimited output (default: on).")
@click.option("--permissive", is_flag=True, help="Accept crossed quotes in the input.")
@_guarded
def momentum(input_path, output_dir, config_path, ls, q_exp, map_kind, price_source,
             regfn, m_winding, phi, epsilon, bins, dump_anchor, figures, permissive):
    """Per-anchor momenta and their distribution statistics."""
    file_cfg = load_ini(config_path) if config_path else {}
    map_section, reg_section = _resolve_map_reg(
        file_cfg, ls, q_exp, map_kind, price_source, regfn, m_winding, phi, epsilon
    )
    run_section = _resolve(
        {"bins": "50", "figures": "true", "input": input_path},
        file_cfg.get("run", {}),
        {"bins": bins, "figures": figures, "input": input_path},
    )
    series = _load_series(input_path, strict=not permissive)
    map_cfg = build_map_config(map_section)
    reg_cfg = build_reg_config(reg_section)
    ms = momentum_series(series, map_cfg, reg_cfg)
    stats = distribution_stats(ms, int(run_section["bins"]))

    out = _prepare_output(output_dir)
    _write(out / "momentum.csv", momentum_to_csv(ms, series))
    _write_json(out / "stats.json", stats_to_dict(stats))
    dumped = None
    if dump_anchor is not None:
        dumped = compute_map(series, dump_anchor, map_cfg)
        _write(out / f"amplitude_anchor_{dump_anchor}.csv", amplitude_to_csv(dumped))
    _write(out / "run_config.ini", dump_ini(
        {"run": run_section, "map": map_section, "regfn": reg_section}
    ))
    if run_section["figures"].lower() == "true":
        from . import plotting

        stamps = series.timestamps[ms.taus]
        label = f"{map_cfg.kind.value} l_s={map_cfg.l_s} q={map_cfg.q:g}"
        click.echo(f"wrote {plotting.plot_momentum(stamps, ms.values, out / 'momentum.png', label)}")
        click.echo(f"wrote {plotting.plot_histogram(stats, out / 'histogram.png', label)}")
        if dumped is not None and map_cfg.kind is MapKind.D2:
            path = plotting.plot_brane(dumped, out / f"brane_anchor_{dump_anchor}.png", label)
            click.echo(f"wrote {path}")


# ---------------------------------------------------------------------------
# stability
# ---------------------------------------------------------------------------


@main.command()
@click.option("--input", "input_path", required=True, help="Tick CSV file.")
@click.option("--output-dir", required=True)
@click.option("--config", "config_path", default=None)
@click.option("--ls", "ls_list", default=None, help="String lengths, comma separated (even).")
@click.option("--window", "window_list", default=None, help="Volatility windows in minutes, comma separated.")
@click.option("--q", "q_exp", type=float, default=None)
@click.option("--figures/--no-figures", default=None, help="Render figures next to the delimited output (default: on).")
@click.option("--permissive", is_flag=True)
@_guarded
def stability(input_path, output_dir, config_path, ls_list, window_list, q_exp,
              figures, permissive):
    """Indicator sweep, slope/tension report, and the correlation grid."""
    file_cfg = load_ini(config_path) if config_path else {}
    section = _resolve(
        {"ls": "20", "window": "20", "q": "1.0", "figures": "true", "input": input_path},
        file_cfg.get("stability", {}),
        {"ls": ls_list, "window": window_list, "q": q_exp,
         "figures": figures, "input": input_path},
    )
    ls_values = _int_list(section["ls"], "--ls")
    window_minutes = _int_list(section["window"], "--window")
    for value in ls_values:
        if value < 2 or value % 2:
            raise ValidationError(f"string lengths must be even and >= 2, got {value}")
    for value in window_minutes:
        if value < 1:
            raise ValidationError(f"windows must be positive minutes, got {value}")
    q = float(section["q"])

    series = _load_series(input_path, strict=not permissive)
    lead_cfg = MapConfig(l_s=ls_values[0], q=q, kind=MapKind.OS2)
    window_ms = [m * 60_000 for m in window_minutes]
    taus, rv, hv, am = stability_sweep(series, lead_cfg, window_ms[0])
    report = regge_slope(am, lead_cfg.l_s)

    out = _prepare_output(output_dir)
    stamps = series.timestamps[taus]
    rows = list(zip(stamps.tolist(), rv.tolist(), hv.tolist(), am.tolist()))
    _write(out / "indicators.csv", indicators_to_csv(rows))
    _write_json(out / "slope.json", slope_to_dict(report))

    grid = correlation_grid(series, ls_values, window_ms, q)
    lines = ["l_s," + ",".join(f"w{m}" for m in window_minutes)]
    for i, l_s in enumerate(ls_values):
        cells = ["" if np.isnan(v) else repr(float(v)) for v in grid[i]]
        lines.append(f"{l_s}," + ",".join(cells))
    _write(out / "correlation.csv", "\n".join(lines) + "\n")
    _write(out / "run_config.ini", dump_ini({"stability": section}))
    if section["figures"].lower() == "true":
        from . import plotting

        path = plotting.plot_indicators(stamps, rv, hv, am, out / "indicators.png")
        click.echo(f"wrote {path}")


# ---------------------------------------------------------------------------
# backtest
# ---------------------------------------------------------------------------


def _auto_band_epsilon(values: np.ndarray) -> float:
    # A quarter of the momentum dispersion keeps regions selective while
    # still producing runs on typical series.
    return 0.25 * float(np.std(values))


def _risk_payload(nav) -> dict | None:
    returns = np.diff(nav.nav) / nav.nav[:-1]
    try:
        return risk_to_dict(mvar_sharpe(ReturnSample(tuple(returns))))
    except (NumericContractError, ValidationError):
        return None


def _run_momentum_model(series, map_cfg, reg_cfg, strategy_section, initial_cash):
    ms = momentum_series(series, map_cfg, reg_cfg)
    raw = strategy_section.get("band_epsilon", "auto")
    band = _auto_band_epsilon(ms.values) if raw == "auto" else float(raw)
    cfg = build_strategy_config(map_cfg, reg_cfg, strategy_section, band_epsilon=band)
    regions = invariant_regions(ms, cfg)
    intents = generate_signals(series, regions, cfg)
    ledger, nav = execute(series, intents, cfg, initial_cash)
    return cfg, ledger, nav


def _strategy_to_dict(cfg: StrategyConfig) -> dict:
    return {
        "map": {
            "kind": cfg.map_cfg.kind.value,
            "ls": cfg.map_cfg.l_s,
            "q": cfg.map_cfg.q,
            "price_source": cfg.map_cfg.price_source.value,
        },
        "regfn": {
            "family": cfg.reg_cfg.family.value,
            "m": cfg.reg_cfg.m,
            "phi": cfg.reg_cfg.phi,
            "epsilon": cfg.reg_cfg.epsilon,
        },
        "trade_altitude": cfg.trade_altitude,
        "band_epsilon": cfg.band_epsilon,
        "min_region_len": cfg.min_region_len,
        "take_profit": cfg.take_profit,
        "stop_loss": cfg.stop_loss,
        "max_position": cfg.max_position,
    }


@main.command()
@click.option("--input", "input_path", required=True, help="Tick CSV file.")
@click.option("--output-dir", required=True)
@click.option("--config", "config_path", default=None)
@_with_options(_map_options)
@click.option("--grid", "grid_path", default=None, help="Grid INI file; runs a grid search.")
@click.option("--compare", is_flag=True, help="Run the four-model comparison recipe.")
@click.option("--objective", type=click.Choice([o.value for o in Objective]), default=None)
@click.option("--trade-altitude", type=float, default=None)
@click.option("--band-epsilon", default=None, help="Momentum tolerance, or 'auto'.")
@click.option("--min-region-len", type=int, default=None)
@click.option("--take-profit", type=float, default=None)
@click.option("--stop-loss", type=float, default=None)
@click.option("--max-position", type=float, default=None)
@click.option("--initial-cash", type=float, default=None)
@click.option("--arma-p", type=int, default=None)
@click.option("--arma-q", type=int, default=None)
@click.option("--arma-warmup", type=int, default=None)
@click.option("--arma-stride", type=int, default=None)
@click.option("--figures/--no-figures", default=None, help="Render figures next to the delimited output (default: on).")
@click.option("--permissive", is_flag=True)
@_guarded
def backtest(input_path, output_dir, config_path, ls, q_exp, map_kind, price_source,
             regfn, m_winding, phi, epsilon, grid_path, compare, objective,
             trade_altitude, band_epsilon, min_region_len, take_profit, stop_loss,
             max_position, initial_cash, arma_p, arma_q, arma_warmup, arma_stride,
             figures, permissive):
    """Backtest one strategy, the comparison recipe, or a parameter grid."""
    from .backtest import grid_search  # local import keeps startup light

    file_cfg = load_ini(config_path) if config_path else {}
    map_section, reg_section = _resolve_map_reg(
        file_cfg, ls, q_exp, map_kind, price_source, regfn, m_winding, phi, epsilon
    )
    strategy_section = _resolve(
        _STRATEGY_DEFAULTS,
        file_cfg.get("strategy", {}),
        {
            "trade_altitude": trade_altitude,
            "band_epsilon": band_epsilon,
            "min_region_len": min_region_len,
            "take_profit": take_profit,
            "stop_loss": stop_loss,
            "max_position": max_position,
        },
    )
    run_section = _resolve(
        {**_ARMA_DEFAULTS, "initial_cash": "100000", "objective": "final_nav",
         "figures": "true", "input": input_path},
        file_cfg.get("backtest", {}),
        {
            "initial_cash": initial_cash,
            "objective": objective,
            "figures": figures,
            "input": input_path,
            "arma_p": arma_p,
            "arma_q": arma_q,
            "arma_warmup": arma_warmup,
            "arma_stride": arma_stride,
        },
    )
    cash = float(run_section["initial_cash"])
    if not cash > 0:
        raise ValidationError("initial cash must be positive")
    series = _load_series(input_path, strict=not permissive)
    out = _prepare_output(output_dir)
    config_sections = {
        "run": run_section,
        "map": map_section,
        "regfn": reg_section,
        "strategy": strategy_section,
    }
    want_figures = run_section["figures"].lower() == "true"

    if grid_path is not None:
        configs = load_grid_file(grid_path)
        if not configs:
            raise ValidationError(f"empty strategy grid in {grid_path}")
        ranked = grid_search(series, configs, Objective(run_section["objective"]),
                             initial_cash=cash)
        payload = [
            {
                "config": _strategy_to_dict(cfg),
                "objective": run_section["objective"],
                "value": value,
            }
            for cfg, value in ranked
        ]
        _write_json(out / "grid_results.json", payload)
        _write(out / "run_config.ini", dump_ini(config_sections))
        return

    if compare:
        ls_value = int(map_section["ls"])
        recipe = {
            "os1ep": (
                MapConfig(ls_value, 8.0, MapKind.OS1),
                build_reg_config({"family": "cs", "m": "1"}),
            ),
            "os2ep": (
                MapConfig(ls_value, 8.0, MapKind.OS2),
                build_reg_config({"family": "cs", "m": "1"}),
            ),
            "d2": (MapConfig(ls_value, 1.0, MapKind.D2), build_reg_config({})),
        }
        navs = {}
        risk = {}
        for name, (mc, rc) in recipe.items():
            _, ledger, nav = _run_momentum_model(series, mc, rc, strategy_section, cash)
            navs[name] = nav
            risk[name] = _risk_payload(nav)
            _write(out / f"nav_{name}.csv", nav_to_csv(nav))
            _write(out / f"ledger_{name}.csv", ledger_to_csv(ledger))
        arma_cfg = build_strategy_config(
            build_map_config(map_section), build_reg_config(reg_section),
            strategy_section, band_epsilon=1.0,
        )
        intents = arma_signals(
            series,
            arma_cfg,
            p=int(run_section["arma_p"]),
            q_ma=int(run_section["arma_q"]),
            warmup=int(run_section["arma_warmup"]),
            stride=int(run_section["arma_stride"]),
            threshold=float(run_section["arma_threshold"]),
        )
        ledger, nav = execute(series, intents, arma_cfg, cash)
        navs["arma"] = nav
        risk["arma"] = _risk_payload(nav)
        _write(out / "nav_arma.csv", nav_to_csv(nav))
        _write(out / "ledger_arma.csv", ledger_to_csv(ledger))
        _write_json(out / "risk.json", risk)
        _write(out / "run_config.ini", dump_ini(config_sections))
        if want_figures:
            from . import plotting

            path = plotting.plot_nav(navs, out / "nav_comparison.png")
            click.echo(f"wrote {path}")
        return

    map_cfg = build_map_config(map_section)
    reg_cfg = build_reg_config(reg_section)
    cfg, ledger, nav = _run_momentum_model(series, map_cfg, reg_cfg, strategy_section, cash)
    _write(out / "ledger.csv", ledger_to_csv(ledger))
    _write(out / "nav.csv", nav_to_csv(nav))
    _write_json(out / "risk.json", _risk_payload(nav))
    _write(out / "run_config.ini", dump_ini(config_sections))
    if want_figures:
        from . import plotting

        label = f"{cfg.map_cfg.kind.value} l_s={cfg.map_cfg.l_s}"
        path = plotting.plot_nav({label: nav}, out / "nav.png")
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
