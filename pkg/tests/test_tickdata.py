from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import make_series
from tickstring import (
    Tick,
    TickSeries,
    ValidationError,
    mid_price,
    parse_ticks,
    resample_ohlc,
    serialize_ticks,
)
from tickstring.tickdata import ohlc_to_csv


class TestParse:
    def test_single_row_maps_fields(self):
        series = parse_ticks("1449187200000,1.0851,1.0849")
        tick = series[0]
        assert tick == Tick(1449187200000, 1.0851, 1.0849)

    def test_header_is_skipped(self):
        series = parse_ticks("timestamp,ask,bid\n1000,1.2,1.1\n2000,1.3,1.2\n")
        assert len(series) == 2
        assert series[0].timestamp == 1000

    def test_non_monotone_rejected(self):
        with pytest.raises(ValidationError, match="row 2"):
            parse_ticks("2000,1.2,1.1\n1000,1.2,1.1")

    def test_inverted_quote_rejected_in_strict_mode(self):
        with pytest.raises(ValidationError, match="inverted"):
            parse_ticks("1000,1.0849,1.0851")

    def test_inverted_quote_allowed_when_permissive(self):
        series = parse_ticks("1000,1.0849,1.0851", strict=False)
        assert series[0].ask < series[0].bid

    def test_duplicate_timestamp_last_wins(self):
        series = parse_ticks("1000,1.0,1.0\n1000,2.0,2.0\n2000,3.0,3.0")
        assert len(series) == 2
        assert series[0].ask == 2.0

    def test_duplicate_timestamp_error_policy(self):
        with pytest.raises(ValidationError, match="duplicate"):
            parse_ticks("1000,1.0,1.0\n1000,2.0,2.0", duplicate_policy="error")

    def test_malformed_line_reports_row_number(self):
        with pytest.raises(ValidationError, match="row 3"):
            parse_ticks("1000,1.0,1.0\n2000,1.0,1.0\n3000,abc,1.0")

    def test_wrong_field_count_rejected(self):
        with pytest.raises(ValidationError, match="3 fields"):
            parse_ticks("1000,1.0")

    def test_empty_input_rejected(self):
        with pytest.raises(ValidationError, match="empty"):
            parse_ticks("")

    def test_iso_timestamps(self):
        series = parse_ticks(
            "2015-12-04T00:00:00Z,1.2,1.1\n"
            "2015-12-04T00:01:00+00:00,1.2,1.1\n"
            "2015-12-04T00:02:00,1.2,1.1"
        )
        assert series.timestamps.tolist() == [
            1449187200000,
            1449187260000,
            1449187320000,
        ]

    def test_bytes_and_file_objects(self, tmp_path):
        text = "1000,1.2,1.1\n2000,1.3,1.2\n"
        from_bytes = parse_ticks(text.encode())
        path = tmp_path / "ticks.csv"
        path.write_text(text)
        with open(path, "rb") as handle:
            from_file = parse_ticks(handle)
        assert from_bytes == from_file

    def test_non_positive_price_rejected(self):
        with pytest.raises(ValidationError):
            parse_ticks("1000,0.0,0.0")


class TestRoundTrip:
    def test_round_trip_is_bit_exact(self, walk_100):
        again = parse_ticks(serialize_ticks(walk_100))
        assert np.array_equal(again.timestamps, walk_100.timestamps)
        assert np.array_equal(again.asks, walk_100.asks)
        assert np.array_equal(again.bids, walk_100.bids)

    @given(
        st.lists(
            st.floats(min_value=1e-6, max_value=1e6, allow_nan=False),
            min_size=1,
            max_size=30,
        )
    )
    @settings(max_examples=50, deadline=None)
    def test_round_trip_arbitrary_floats(self, mids):
        series = make_series([m * 1.0001 for m in mids], mids)
        again = parse_ticks(serialize_ticks(series))
        assert np.array_equal(again.asks, series.asks)
        assert np.array_equal(again.bids, series.bids)


class TestMidPrice:
    def test_spec_values(self):
        assert mid_price(Tick(0, 1.2, 1.0)) == pytest.approx(1.1, abs=0)
        assert mid_price(Tick(0, 2.0, 2.0)) == 2.0
        assert mid_price(Tick(0, 1.0851, 1.0849)) == pytest.approx(1.0850, abs=1e-12)

    @given(
        st.floats(min_value=1e-6, max_value=1e6),
        st.floats(min_value=0.0, max_value=1.0),
    )
    @settings(max_examples=100, deadline=None)
    def test_mid_between_bid_and_ask(self, bid, rel_spread):
        ask = bid * (1.0 + rel_spread)
        tick = Tick(0, ask, bid)
        assert bid <= mid_price(tick) <= ask


class TestSeries:
    def test_requires_strictly_increasing(self):
        with pytest.raises(ValidationError, match="increasing"):
            TickSeries([0, 0], [1.0, 1.0], [1.0, 1.0])

    def test_requires_non_empty(self):
        with pytest.raises(ValidationError, match="empty"):
            TickSeries([], [], [])

    def test_arrays_are_read_only(self, walk_100):
        with pytest.raises(ValueError):
            walk_100.asks[0] = 2.0

    def test_slicing(self, walk_100):
        part = walk_100[10:20]
        assert len(part) == 10
        assert part[0] == walk_100[10]


class TestResample:
    def test_ohlc_within_one_bar(self):
        # Brute force over the bar's ticks: first/max/min/last.
        asks = [1.0, 3.0, 2.0]
        bids = [0.9, 2.8, 1.9]
        series = make_series(asks, bids, step=10_000)  # all within one minute
        (bar,) = resample_ohlc(series, 60_000)
        assert (bar.open_ask, bar.high_ask, bar.low_ask, bar.close_ask) == (
            asks[0],
            max(asks),
            min(asks),
            asks[-1],
        )
        assert (bar.open_bid, bar.high_bid, bar.low_bid, bar.close_bid) == (
            bids[0],
            max(bids),
            min(bids),
            bids[-1],
        )

    def test_single_tick_bar(self):
        series = make_series([1.5], [1.4])
        (bar,) = resample_ohlc(series, 60_000)
        assert bar.open_ask == bar.high_ask == bar.low_ask == bar.close_ask == 1.5

    def test_empty_intervals_omitted(self):
        # Two ticks an hour apart: two bars, no gap bars between.
        series = make_series([1.0, 2.0], [1.0, 2.0], step=3_600_000)
        bars = resample_ohlc(series, 60_000)
        assert len(bars) == 2

    def test_bar_count_bound_and_partition(self, walk_100):
        interval = 180_000
        bars = resample_ohlc(walk_100, interval)
        span = int(walk_100.timestamps[-1] - walk_100.timestamps[0])
        assert len(bars) <= math.ceil(span / interval) + 1
        # The per-bar buckets partition the input ticks exactly.
        keys = walk_100.timestamps // interval
        assert len(bars) == np.unique(keys).size
        starts = [bar.interval_start for bar in bars]
        assert starts == sorted(starts)
        assert set(starts) == {int(k) * interval for k in np.unique(keys)}

    def test_alignment_to_interval_boundaries(self):
        series = make_series([1.0, 1.1], [1.0, 1.1], start=90_000, step=60_000)
        bars = resample_ohlc(series, 60_000)
        assert [b.interval_start for b in bars] == [60_000, 120_000]

    def test_invalid_interval(self, walk_100):
        with pytest.raises(ValidationError):
            resample_ohlc(walk_100, 0)

    def test_csv_header(self, walk_100):
        text = ohlc_to_csv(resample_ohlc(walk_100, 300_000))
        assert text.splitlines()[0] == (
            "interval_start,open_ask,high_ask,low_ask,close_ask,"
            "open_bid,high_bid,low_bid,close_bid"
        )
