"""Shared test utilities."""

from __future__ import annotations

from tickstring import TickSeries

START_MS = 1_449_187_200_000
STEP_MS = 60_000


def make_series(asks, bids=None, *, start=START_MS, step=STEP_MS, strict=True):
    """TickSeries on a regular millisecond grid; bids default to asks."""
    if bids is None:
        bids = list(asks)
    stamps = [start + i * step for i in range(len(asks))]
    return TickSeries(stamps, asks, bids, strict=strict)
