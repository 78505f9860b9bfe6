from __future__ import annotations

import numpy as np
import pytest

from tickstring import random_walk_ticks


@pytest.fixture(scope="session")
def walk_100():
    """100-tick jittered walk: small enough for brute-force double loops."""
    return random_walk_ticks(
        100, seed=17, volatility=3e-3, spread=5e-4, spread_jitter=0.25
    )


@pytest.fixture(scope="session")
def walk_2k():
    """Mid-size clustered walk for strategy and indicator tests."""
    return random_walk_ticks(
        2000,
        seed=5,
        volatility=8e-4,
        spread=2e-4,
        spread_jitter=0.2,
        vol_persistence=0.99,
        vol_of_vol=0.05,
        stale_side="ask",
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
