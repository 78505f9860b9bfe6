from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from helpers import STEP_MS, make_series
from tickstring import (
    ConjugateMode,
    MapConfig,
    NumericContractError,
    ValidationError,
    angular_momentum,
    angular_momentum_series,
    conjugate_series,
    dp_brane_tension,
    historical_volatility,
    momentum_distance,
    pearson_correlation,
    regge_slope,
    return_volatility,
)
from tickstring.stability import correlation_grid, stability_sweep
from tickstring.strmaps import StringAmplitude1D

TWO_PI = 2.0 * math.pi


def series_with_returns(returns):
    """Prices whose one-step (p_h - p_{h-1}) / p_h returns equal `returns`."""
    prices = [1.0]
    for r in returns:
        prices.append(prices[-1] / (1.0 - r))
    return make_series(prices)


class TestReturnVolatility:
    def test_constant_price(self):
        series = make_series([2.0] * 10)
        assert return_volatility(series, 0, 8) == 0.0

    def test_single_step_window(self):
        series = make_series([1.0, 1.1, 1.2])
        assert return_volatility(series, 0, 2) == 0.0

    def test_two_returns(self):
        series = series_with_returns([0.1, 0.3])
        assert return_volatility(series, 0, 4) == pytest.approx(0.1, rel=1e-12)

    def test_matches_bruteforce(self, walk_100):
        p = walk_100.mids().tolist()
        for tau in (0, 10, 60):
            assert return_volatility(walk_100, tau, 12) == pytest.approx(
                oracles.return_volatility(p, tau, 12), rel=1e-12
            )

    def test_odd_length_rejected(self, walk_100):
        with pytest.raises(ValidationError, match="even"):
            return_volatility(walk_100, 0, 7)

    def test_out_of_bounds(self, walk_100):
        with pytest.raises(ValidationError):
            return_volatility(walk_100, 95, 20)

    def test_radicand_nonnegative_on_random_windows(self, rng):
        # Averaged moments make the radicand a population variance.
        for _ in range(1000):
            n = int(rng.integers(3, 40))
            prices = np.exp(np.cumsum(rng.normal(0, 0.05, size=n))) + 0.1
            series = make_series(prices.tolist())
            l_s = 2 * int(rng.integers(1, n))
            half = l_s // 2
            if half >= n:
                continue
            value = return_volatility(series, 0, l_s)
            assert value >= 0.0 and np.isfinite(value)


class TestHistoricalVolatility:
    def test_constant_price(self):
        series = make_series([3.0] * 20)
        assert historical_volatility(series, 10, 5 * STEP_MS) == 0.0

    def test_two_returns(self):
        series = series_with_returns([0.1, 0.3])
        value = historical_volatility(series, 2, 3 * STEP_MS)
        assert value == pytest.approx(0.1, rel=1e-12)

    def test_population_std_against_oracle(self, walk_100):
        window = 10 * STEP_MS
        for tau in (30, 50, 99):
            p = walk_100.mids().tolist()
            start = tau - 9
            returns = [
                (p[i] - p[i - 1]) / p[i] for i in range(start + 1, tau + 1)
            ]
            assert historical_volatility(walk_100, tau, window) == pytest.approx(
                oracles.population_std(returns), rel=1e-12
            )

    def test_ramp_volatility_decreases_with_price_level(self):
        low = make_series([10.0 + i for i in range(30)])
        high = make_series([100.0 + i for i in range(30)])
        window = 10 * STEP_MS
        v_low = historical_volatility(low, 25, window)
        v_high = historical_volatility(high, 25, window)
        assert v_low > v_high > 0.0

    def test_insufficient_ticks(self, walk_100):
        with pytest.raises(ValidationError, match="fewer than 2"):
            historical_volatility(walk_100, 0, STEP_MS)

    def test_invalid_window(self, walk_100):
        with pytest.raises(ValidationError):
            historical_volatility(walk_100, 10, 0)


class TestConjugate:
    def test_zero_amplitude(self):
        amp = StringAmplitude1D(0, np.zeros(5))
        ts = [1000 * i for i in range(5)]
        x = conjugate_series(amp, ts, ConjugateMode.ALIGNED)
        assert np.all(x.values == 0.0)

    def test_constant_amplitude_telescopes(self):
        c = 0.75
        amp = StringAmplitude1D(0, np.full(6, c))
        ts = [1000 * i for i in range(6)]  # unit-second steps
        x = conjugate_series(amp, ts, ConjugateMode.ALIGNED)
        assert x.values.tolist() == [c * h for h in range(6)]

    def test_literal_mode_truncates(self):
        ts3 = [0, 1000, 2000]
        amp = StringAmplitude1D(0, np.array([0.0, 1.0, 0.0]))
        x = conjugate_series(amp, ts3, ConjugateMode.LITERAL)
        assert x.values.tolist() == [0.0, 0.0, 0.0]
        # One coordinate more shows the shifted contribution arriving at h=3.
        ts4 = [0, 1000, 2000, 3000]
        amp = StringAmplitude1D(0, np.array([0.0, 1.0, 0.0, 0.0]))
        x = conjugate_series(amp, ts4, ConjugateMode.LITERAL)
        assert x.values.tolist() == [0.0, 0.0, 0.0, 1.0]

    def test_literal_matches_oracle(self, rng):
        values = rng.normal(size=9)
        ts = (1_000_000 + np.cumsum(rng.integers(1, 5000, size=9))).tolist()
        x = conjugate_series(StringAmplitude1D(0, values), ts, ConjugateMode.LITERAL)
        expected = oracles.conjugate(values.tolist(), ts, aligned=False)
        assert x.values == pytest.approx(expected, rel=1e-14, abs=1e-18)

    def test_aligned_discrete_derivative_exact(self):
        # Dyadic amplitudes and integer-second steps make cumsum exact.
        values = np.array([0.5, -0.25, 1.75, 0.125, -2.0])
        ts = [0, 1000, 3000, 4000, 9000]
        x = conjugate_series(StringAmplitude1D(0, values), ts, ConjugateMode.ALIGNED)
        dt = np.diff(ts) / 1000.0
        recovered = np.diff(x.values) / dt
        assert recovered.tolist() == values[:-1].tolist()

    def test_aligned_discrete_derivative_random(self, rng):
        values = rng.normal(size=20)
        ts = np.arange(20) * 60_000
        x = conjugate_series(StringAmplitude1D(0, values), ts, ConjugateMode.ALIGNED)
        recovered = np.diff(x.values) / 60.0
        assert recovered == pytest.approx(values[:-1], rel=1e-12, abs=1e-15)

    def test_non_monotone_timestamps_rejected(self):
        amp = StringAmplitude1D(0, np.zeros(3))
        with pytest.raises(ValidationError):
            conjugate_series(amp, [0, 1000, 1000])


class TestAngularMomentum:
    def test_identical_sides_give_zero(self):
        series = make_series([1.0, 1.4, 0.8, 1.2, 1.1])
        assert angular_momentum(series, 0, MapConfig(l_s=4)) == 0.0

    def test_antisymmetric_under_swap(self, walk_100):
        cfg = MapConfig(l_s=10, q=1.0)
        swapped = make_series(
            walk_100.bids.tolist(), walk_100.asks.tolist(), strict=False
        )
        for tau in (0, 25, 60):
            assert angular_momentum(swapped, tau, cfg) == pytest.approx(
                -angular_momentum(walk_100, tau, cfg), rel=1e-12, abs=1e-30
            )

    def test_hand_case_matches_oracle(self):
        series = make_series([1.0, 2.0, 4.0], [1.0, 3.0, 4.0], strict=False)
        got = angular_momentum(series, 0, MapConfig(l_s=2, q=1.0))
        expected = oracles.angular_momentum(
            [1.0, 2.0, 4.0], [1.0, 3.0, 4.0], series.timestamps.tolist(), 0, 2, 1.0
        )
        assert got == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize("q", [1.0, 2.0])
    def test_oracle_equivalence_over_anchors(self, walk_100, q):
        cfg = MapConfig(l_s=8, q=q)
        ask = walk_100.asks.tolist()
        bid = walk_100.bids.tolist()
        ts = walk_100.timestamps.tolist()
        for tau in range(0, len(walk_100) - 8, 7):
            assert angular_momentum(walk_100, tau, cfg) == pytest.approx(
                oracles.angular_momentum(ask, bid, ts, tau, 8, q), rel=1e-12, abs=1e-300
            )

    def test_vectorized_matches_scalar(self, walk_2k):
        cfg = MapConfig(l_s=12, q=1.0)
        taus, values = angular_momentum_series(walk_2k, cfg, range(0, 500, 13))
        for tau, value in zip(taus, values):
            assert value == pytest.approx(
                angular_momentum(walk_2k, int(tau), cfg), rel=1e-12
            )


class TestMomentumDistance:
    def test_identical_sides(self):
        series = make_series([1.0, 1.3, 0.9, 1.1])
        assert momentum_distance(series, 0, MapConfig(l_s=3)) == 0.0

    def test_symmetric_under_swap(self, walk_100):
        cfg = MapConfig(l_s=9, q=1.0)
        swapped = make_series(
            walk_100.bids.tolist(), walk_100.asks.tolist(), strict=False
        )
        for tau in (0, 33):
            assert momentum_distance(swapped, tau, cfg) == pytest.approx(
                momentum_distance(walk_100, tau, cfg), rel=1e-13
            )

    def test_nonnegative(self, walk_100):
        assert momentum_distance(walk_100, 11, MapConfig(l_s=6)) >= 0.0

    @pytest.mark.parametrize("q", [1.0, 2.0])
    def test_oracle_equivalence(self, walk_100, q):
        ask = walk_100.asks.tolist()
        bid = walk_100.bids.tolist()
        cfg = MapConfig(l_s=8, q=q)
        for tau in range(0, len(walk_100) - 8, 11):
            assert momentum_distance(walk_100, tau, cfg) == pytest.approx(
                oracles.momentum_distance(ask, bid, tau, 8, q), rel=1e-12, abs=1e-300
            )


class TestSlopeAndTension:
    def test_reciprocal_invariant(self, rng):
        for _ in range(50):
            values = rng.normal(size=int(rng.integers(1, 30))) * 10.0 ** rng.integers(-12, 3)
            report = regge_slope(values, int(rng.integers(2, 2000)))
            if report.alpha_prime > 0:
                assert report.tension_T0 * TWO_PI * report.alpha_prime == pytest.approx(
                    1.0, rel=1e-12
                )

    def test_zero_momenta_leave_tension_absent(self):
        report = regge_slope([0.0, 0.0], 100)
        assert report.alpha_prime == 0.0
        assert report.tension_T0 is None

    def test_mean_abs(self):
        report = regge_slope([1.0, -3.0], 10)
        assert report.mean_abs_angular_momentum == 2.0
        assert report.alpha_prime == pytest.approx(2.0 / (TWO_PI * 100.0), rel=1e-15)

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            regge_slope([], 10)

    def test_unit_parameters(self):
        assert dp_brane_tension(1, 1.0, 1.0) == pytest.approx(1.0 / TWO_PI, rel=1e-15)

    def test_direct_evaluation_p2(self):
        assert dp_brane_tension(2, 1.0, 2.0) == pytest.approx(
            1.0 / (TWO_PI**2 * 8.0), rel=1e-15
        )
        assert dp_brane_tension(2, 1.0, 2.0) == pytest.approx(0.00316629, abs=5e-9)

    def test_matches_string_tension_at_p1(self):
        for l_s in (0.5, 1.0, 3.0):
            alpha_prime = l_s * l_s
            assert dp_brane_tension(1, 1.0, l_s) == pytest.approx(
                1.0 / (TWO_PI * alpha_prime), rel=1e-14
            )

    def test_invalid_parameters(self):
        with pytest.raises(ValidationError):
            dp_brane_tension(-1, 1.0, 1.0)
        with pytest.raises(ValidationError):
            dp_brane_tension(1, 0.0, 1.0)


class TestPearson:
    def test_perfect_correlation(self):
        x = [1.0, 2.0, 5.0]
        assert pearson_correlation(x, x) == 1.0

    def test_perfect_anticorrelation(self):
        x = [1.0, 2.0, 5.0]
        assert pearson_correlation(x, [-v for v in x]) == -1.0

    def test_direct_formula(self):
        # Brute-force product-moment value for two hand inputs; the second
        # triple reproduces the 0.98198... constant.
        got = pearson_correlation([1.0, 2.0, 3.0], [2.0, 4.0, 7.0])
        assert got == pytest.approx(oracles.pearson([1, 2, 3], [2, 4, 7]), rel=1e-14)
        assert got == pytest.approx(15.0 / math.sqrt(228.0), rel=1e-14)
        got = pearson_correlation([1.0, 2.0, 3.0], [1.0, 2.0, 4.0])
        assert got == pytest.approx(0.981980506, rel=1e-9)

    def test_matches_scipy(self, rng):
        from scipy import stats as sp_stats

        x = rng.normal(size=200)
        y = 0.4 * x + rng.normal(size=200)
        assert pearson_correlation(x, y) == pytest.approx(
            float(sp_stats.pearsonr(x, y).statistic), rel=1e-12
        )

    @given(
        st.floats(min_value=0.1, max_value=50),
        st.floats(min_value=-100, max_value=100),
    )
    @settings(max_examples=50, deadline=None)
    def test_affine_invariance(self, a, b):
        x = np.array([0.3, 1.7, -2.2, 0.9, 4.1])
        y = np.array([1.0, -0.4, 2.2, 0.6, -1.5])
        base = pearson_correlation(x, y)
        assert pearson_correlation(a * x + b, y) == pytest.approx(base, rel=1e-9)
        assert pearson_correlation(x, a * y + b) == pytest.approx(base, rel=1e-9)

    def test_zero_variance_rejected(self):
        with pytest.raises(NumericContractError):
            pearson_correlation([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            pearson_correlation([1.0, 2.0], [1.0, 2.0, 3.0])


class TestSweeps:
    def test_stability_sweep_shapes(self, walk_2k):
        cfg = MapConfig(l_s=20, q=1.0)
        taus, rv, hv, am = stability_sweep(walk_2k, cfg, 20 * STEP_MS)
        assert taus.size == rv.size == hv.size == am.size
        assert int(taus[-1]) == len(walk_2k) - 21
        assert np.all(rv >= 0.0) and np.all(hv >= 0.0)

    def test_correlation_grid_is_finite_on_clustered_walk(self, walk_2k):
        grid = correlation_grid(walk_2k, [10, 20], [10 * STEP_MS, 20 * STEP_MS])
        assert grid.shape == (2, 2)
        assert np.all(np.isfinite(grid))
        assert np.all(np.abs(grid) <= 1.0)
