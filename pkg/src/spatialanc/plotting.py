"""Figure rendering for experiment reports.

Kept separate from the experiments so the CSV path has no matplotlib
dependency at import time; the harness renders a PNG next to each CSV
unless figures are disabled.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_mode_map(freqs: np.ndarray, order: int, values_db: np.ndarray,
                    out_path: Path, title: str = "", vmin: float = -60.0,
                    vmax: float = 20.0) -> None:
    """Frequency x mode-index dB map (spectrogram-style)."""
    fig, ax = plt.subplots(figsize=(7, 4.2))
    ms = np.arange(-order, order + 1)
    mesh = ax.pcolormesh(ms, freqs, values_db, shading="nearest",
                         cmap="viridis", vmin=vmin, vmax=vmax)
    ax.set_xlabel("mode index m")
    ax.set_ylabel("frequency (Hz)")
    if title:
        ax.set_title(title)
    fig.colorbar(mesh, ax=ax, label="dB")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_curves(freqs: np.ndarray, curves: dict[str, np.ndarray],
                  out_path: Path, ylabel: str, title: str = "") -> None:
    """One line per method over the frequency sweep."""
    fig, ax = plt.subplots(figsize=(7, 4.2))
    for label, values in curves.items():
        finite = np.isfinite(values)
        ax.plot(np.asarray(freqs)[finite], np.asarray(values)[finite],
                marker=".", markersize=3, linewidth=1.1, label=label)
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
