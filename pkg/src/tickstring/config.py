"""Flat key-value run configuration with section headers (INI).

Chosen for diff-friendliness when tracking experiments: every CLI run can
be reproduced from its resolved config file alone. Grid files use the same
format with comma-separated value lists; the cross product of all listed
keys defines the strategy lattice.
"""

from __future__ import annotations

import configparser
import io
import itertools
from pathlib import Path
from typing import Mapping

from .backtest import StrategyConfig, strategy_sort_key
from .errors import ValidationError
from .predictor import RegularFnConfig, RegularFnFamily
from .strmaps import MapConfig, MapKind, PriceSource

__all__ = [
    "load_ini",
    "dump_ini",
    "build_map_config",
    "build_reg_config",
    "build_strategy_config",
    "expand_grid",
    "load_grid_file",
]

_MAP_KEYS = ("kind", "ls", "q", "price_source")
_REG_KEYS = ("family", "m", "phi", "epsilon")
_STRATEGY_KEYS = (
    "trade_altitude",
    "band_epsilon",
    "min_region_len",
    "take_profit",
    "stop_loss",
    "max_position",
)


def load_ini(path: str | Path) -> dict[str, dict[str, str]]:
    """Read an INI file into plain nested dicts (no interpolation)."""
    parser = configparser.ConfigParser(interpolation=None)
    text = Path(path).read_text(encoding="utf-8")
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ValidationError(f"bad config file {path}: {exc}") from None
    return {section: dict(parser[section]) for section in parser.sections()}


def dump_ini(sections: Mapping[str, Mapping[str, object]]) -> str:
    """Render nested dicts as INI text, preserving insertion order."""
    out = io.StringIO()
    for name, content in sections.items():
        out.write(f"[{name}]\n")
        for key, value in content.items():
            out.write(f"{key} = {value}\n")
        out.write("\n")
    return out.getvalue()


def _parse_value(kind: type, key: str, raw: str):
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
    except ValueError:
        raise ValidationError(f"bad value for {key}: {raw!r}") from None
    return raw


def build_map_config(settings: Mapping[str, str]) -> MapConfig:
    """MapConfig from string settings (keys: kind, ls, q, price_source)."""
    kind_raw = settings.get("kind", "os2")
    try:
        kind = MapKind(kind_raw)
    except ValueError:
        raise ValidationError(f"unknown map kind {kind_raw!r}") from None
    source_raw = settings.get("price_source", "mid")
    try:
        source = PriceSource(source_raw)
    except ValueError:
        raise ValidationError(f"unknown price source {source_raw!r}") from None
    return MapConfig(
        l_s=_parse_value(int, "ls", settings.get("ls", "100")),
        q=_parse_value(float, "q", settings.get("q", "1.0")),
        kind=kind,
        price_source=source,
    )


def build_reg_config(settings: Mapping[str, str]) -> RegularFnConfig:
    """RegularFnConfig from string settings (keys: family, m, phi, epsilon)."""
    family_raw = settings.get("family", "none")
    try:
        family = RegularFnFamily(family_raw)
    except ValueError:
        raise ValidationError(f"unknown regular-function family {family_raw!r}") from None
    return RegularFnConfig(
        family=family,
        m=_parse_value(int, "m", settings.get("m", "0")),
        phi=_parse_value(float, "phi", settings.get("phi", "0.0")),
        epsilon=_parse_value(float, "epsilon", settings.get("epsilon", "0.0")),
    )


def build_strategy_config(
    map_cfg: MapConfig,
    reg_cfg: RegularFnConfig,
    settings: Mapping[str, str],
    *,
    band_epsilon: float | None = None,
) -> StrategyConfig:
    """StrategyConfig from string settings; band_epsilon may be injected."""
    if band_epsilon is None:
        band_epsilon = _parse_value(
            float, "band_epsilon", settings.get("band_epsilon", "1e-4")
        )
    return StrategyConfig(
        map_cfg=map_cfg,
        reg_cfg=reg_cfg,
        trade_altitude=_parse_value(
            float, "trade_altitude", settings.get("trade_altitude", "1000")
        ),
        band_epsilon=band_epsilon,
        min_region_len=_parse_value(
            int, "min_region_len", settings.get("min_region_len", "5")
        ),
        take_profit=_parse_value(float, "take_profit", settings.get("take_profit", "0.003")),
        stop_loss=_parse_value(float, "stop_loss", settings.get("stop_loss", "0.002")),
        max_position=_parse_value(
            float, "max_position", settings.get("max_position", "10000")
        ),
    )


def expand_grid(sections: Mapping[str, Mapping[str, str]]) -> list[StrategyConfig]:
    """Cross product of every comma-separated value list in the grid sections.

    Returns configs sorted by their lexicographic field order so the grid
    is identical however the file lists its values. A file with no keys in
    any relevant section expands to the empty grid.
    """
    axes: list[tuple[str, str, list[str]]] = []
    for section, keys in (("map", _MAP_KEYS), ("regfn", _REG_KEYS), ("strategy", _STRATEGY_KEYS)):
        content = sections.get(section, {})
        for key in keys:
            if key in content:
                values = [v.strip() for v in str(content[key]).split(",") if v.strip()]
                if not values:
                    raise ValidationError(f"grid key {section}.{key} has no values")
                axes.append((section, key, values))
    if not axes:
        return []
    configs = []
    for combo in itertools.product(*(values for _, _, values in axes)):
        chosen: dict[str, dict[str, str]] = {"map": {}, "regfn": {}, "strategy": {}}
        for (section, key, _), value in zip(axes, combo):
            chosen[section][key] = value
        map_cfg = build_map_config(chosen["map"])
        reg_cfg = build_reg_config(chosen["regfn"])
        configs.append(build_strategy_config(map_cfg, reg_cfg, chosen["strategy"]))
    configs.sort(key=strategy_sort_key)
    return configs


def load_grid_file(path: str | Path) -> list[StrategyConfig]:
    """Read a grid INI file and expand it into the strategy lattice."""
    return expand_grid(load_ini(path))
