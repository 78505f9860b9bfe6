"""Figure rendering for the CLI report paths.

Every command that writes delimited output can also render the matching
matplotlib figure next to it. The Agg backend is forced so rendering works
headless; all functions write PNG files and return the path they wrote.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .backtest import NavSeries
from .predictor import DistributionStats
from .strmaps import BraneAmplitude2D

__all__ = [
    "plot_momentum",
    "plot_histogram",
    "plot_indicators",
    "plot_nav",
    "plot_brane",
]


def _time_axis(timestamps_ms: np.ndarray) -> np.ndarray:
    return np.asarray(timestamps_ms, dtype="datetime64[ms]")


def plot_momentum(
    timestamps_ms: np.ndarray, values: np.ndarray, path: str | Path, title: str = ""
) -> Path:
    """Line plot of per-anchor momentum values."""
    fig, ax = plt.subplots(figsize=(9, 3.5))
    ax.plot(_time_axis(timestamps_ms), values, lw=0.8)
    ax.set_xlabel("anchor time")
    ax.set_ylabel("momentum")
    if title:
        ax.set_title(title)
    fig.autofmt_xdate()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_histogram(stats: DistributionStats, path: str | Path, title: str = "") -> Path:
    """Histogram of a momentum distribution with its mean/deviation marked."""
    fig, ax = plt.subplots(figsize=(6, 4))
    widths = np.diff(stats.edges)
    if widths.size and np.all(widths > 0):
        ax.bar(stats.edges[:-1], stats.counts, width=widths, align="edge", alpha=0.75)
    else:
        ax.bar([0], stats.counts, width=1.0, alpha=0.75)
    ax.axvline(stats.mu, color="k", lw=1.0, label=f"mu = {stats.mu:.3g}")
    ax.axvline(stats.mu + stats.sigma, color="k", lw=0.8, ls="--", label=f"sigma = {stats.sigma:.3g}")
    ax.axvline(stats.mu - stats.sigma, color="k", lw=0.8, ls="--")
    ax.set_xlabel("momentum")
    ax.set_ylabel("count")
    ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_indicators(
    timestamps_ms: np.ndarray,
    return_vol: np.ndarray,
    hist_vol: np.ndarray,
    angular_momentum: np.ndarray,
    path: str | Path,
) -> Path:
    """Stacked panels: return volatility, historical volatility, angular momentum."""
    axis = _time_axis(timestamps_ms)
    fig, (ax1, ax2, ax3) = plt.subplots(3, 1, figsize=(9, 7), sharex=True)
    ax1.plot(axis, return_vol, lw=0.8, color="tab:green")
    ax1.set_ylabel("return vol")
    ax2.plot(axis, hist_vol, lw=0.8, color="tab:olive")
    ax2.set_ylabel("hist vol")
    ax3.plot(axis, angular_momentum, lw=0.8, color="tab:blue")
    ax3.set_ylabel("angular momentum")
    ax3.set_xlabel("anchor time")
    fig.autofmt_xdate()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_nav(curves: Mapping[str, NavSeries], path: str | Path) -> Path:
    """Net-asset-value trajectories, one labeled line per model."""
    fig, ax = plt.subplots(figsize=(9, 4.5))
    for label, nav in curves.items():
        ax.plot(_time_axis(nav.timestamps), nav.nav, lw=0.9, label=label)
    ax.set_xlabel("time")
    ax.set_ylabel("net asset value")
    ax.legend(loc="best")
    fig.autofmt_xdate()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_brane(amp: BraneAmplitude2D, path: str | Path, title: str = "") -> Path:
    """Heat map of one anchor's brane amplitude grid."""
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    image = ax.imshow(amp.values, origin="lower", aspect="equal", cmap="RdBu_r")
    fig.colorbar(image, ax=ax, label="amplitude")
    ax.set_xlabel("h2")
    ax.set_ylabel("h1")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
