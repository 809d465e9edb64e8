"""Figure rendering for the report path.

Every CSV the driver writes gets a PNG next to it with the same stem.
Figures are deliberately plain (single axes, labeled lines); the CSV
stays the authoritative output and feeds external plotting if needed.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_series(x, series: dict, xlabel: str, ylabel: str, path, *,
                logx: bool = False, logy: bool = False, title: str = ""):
    """One axes, one labeled line per entry of ``series``."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, y in series.items():
        ax.plot(x, y, label=str(label), linewidth=1.2)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend(fontsize=8)
    _save(fig, path)


def plot_spectrum(groups: dict, path):
    """Eigenstate entropy versus index, one line per system size."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for n_spins, rows in groups.items():
        idx = [n for n, _, _ in rows]
        ent = [s for _, _, s in rows]
        ax.plot(idx, ent, marker="o", markersize=3, linewidth=1.0,
                label=f"N={n_spins}")
    ax.set_xlabel("eigenstate index n")
    ax.set_ylabel("half-block entropy S")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_pulse(times, gammas, gamma_ref: float, path):
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    ax.plot(times, gammas, linewidth=1.0)
    ax.axhline(gamma_ref, color="gray", linewidth=0.8, linestyle="--")
    ax.set_xlabel("t")
    ax.set_ylabel("Gamma(t)")
    _save(fig, path)


def plot_scaling(ns, series: dict, ylabel: str, path):
    """Log-log scaling plot over system size."""
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    for label, values in series.items():
        finite = np.isfinite(values)
        ax.plot(np.asarray(ns)[finite], np.asarray(values)[finite],
                marker="s", markersize=4, linewidth=1.0, label=str(label))
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    _save(fig, path)
