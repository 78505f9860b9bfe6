from __future__ import annotations

import numpy as np
import pytest

from tickstring import ValidationError, random_walk_ticks


class TestRandomWalkTicks:
    def test_deterministic_for_fixed_seed(self):
        a = random_walk_ticks(500, seed=42)
        b = random_walk_ticks(500, seed=42)
        assert a == b

    def test_seeds_differ(self):
        a = random_walk_ticks(500, seed=1)
        b = random_walk_ticks(500, seed=2)
        assert not np.array_equal(a.asks, b.asks)

    def test_zero_spread_collapses_sides(self):
        series = random_walk_ticks(200, seed=3, spread=0.0)
        assert np.array_equal(series.asks, series.bids)

    def test_quotes_never_cross(self):
        for stale in (None, "ask", "bid"):
            series = random_walk_ticks(
                2000, seed=8, volatility=5e-3, spread=1e-4, spread_jitter=0.5,
                stale_side=stale,
            )
            assert np.all(series.asks >= series.bids)

    def test_zero_drift_sampling_bound(self):
        n = 1_000_000
        series = random_walk_ticks(n, seed=42, drift=0.0, volatility=1e-3, spread=0.0)
        log_returns = np.diff(np.log(series.mids()))
        assert abs(log_returns.mean()) < 3.0 * 1e-3 / np.sqrt(n - 1)

    def test_drift_shows_up(self):
        series = random_walk_ticks(20_000, seed=4, drift=1e-4, volatility=1e-4, spread=0.0)
        log_returns = np.diff(np.log(series.mids()))
        assert log_returns.mean() == pytest.approx(1e-4, rel=0.05)

    def test_timestamps_on_interval_grid(self):
        series = random_walk_ticks(50, seed=1, interval_ms=15_000)
        assert np.all(np.diff(series.timestamps) == 15_000)

    def test_vol_clustering_changes_dispersion_over_time(self):
        series = random_walk_ticks(
            5000, seed=6, volatility=1e-3, vol_persistence=0.995, vol_of_vol=0.08,
            spread=0.0,
        )
        r = np.diff(np.log(series.mids()))
        blocks = r[: 4900].reshape(49, 100).std(axis=1)
        assert blocks.max() / blocks.min() > 2.0

    def test_parameter_validation(self):
        with pytest.raises(ValidationError):
            random_walk_ticks(0, seed=1)
        with pytest.raises(ValidationError):
            random_walk_ticks(10, seed=1, start_price=0.0)
        with pytest.raises(ValidationError):
            random_walk_ticks(10, seed=1, vol_persistence=1.0)
        with pytest.raises(ValidationError):
            random_walk_ticks(10, seed=1, stale_side="mid")
        with pytest.raises(ValidationError):
            random_walk_ticks(10, seed=1, interval_ms=0)
