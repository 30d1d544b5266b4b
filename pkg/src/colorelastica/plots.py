"""Figure rendering for solver histories and relative-energy sweeps.

Figures are written straight to files; the Agg backend keeps this usable
from headless runs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .solver import IterationHistory


def plot_history(history: IterationHistory, path, title: str = "") -> None:
    """Energy and relative-change curves of one denoising run."""
    iters = np.arange(1, len(history) + 1)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(iters, history.energies, lw=1.2)
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("energy")
    ax2.semilogy(iters, history.rel_changes, lw=1.2)
    ax2.set_xlabel("iteration")
    ax2.set_ylabel("relative change")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(rows, path, title: str = "") -> None:
    """Mean relative energy versus noise level, one curve per regularizer.

    rows: iterable of (sd, seed, regularizer, value, relative_value), as
    written to the sweep CSV.
    """
    curves: dict[str, dict[float, list[float]]] = {}
    for sd, _seed, reg, _value, relative in rows:
        curves.setdefault(reg, {}).setdefault(float(sd), []).append(float(relative))
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for reg in sorted(curves):
        sds = sorted(curves[reg])
        means = [float(np.mean(curves[reg][sd])) for sd in sds]
        ax.plot(sds, means, marker="o", ms=3, lw=1.2, label=reg)
    ax.set_xlabel("noise SD")
    ax.set_ylabel("relative energy")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
