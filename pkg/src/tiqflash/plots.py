"""Report figures.  Headless backend, deterministic SVG output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "tiqflash"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = ["staircase_figure", "dnl_figure", "drift_figure", "save_svg"]


def staircase_figure(v_in, codes, n_bits=None):
    """Transfer staircase: output code against input voltage, sorted by v_in."""
    v = np.asarray(v_in, dtype=float)
    c = np.asarray(codes)
    order = np.argsort(v, kind="stable")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.step(v[order], c[order], where="post", lw=1.0)
    ax.set_xlabel("input voltage (V)")
    ax.set_ylabel("output code")
    if n_bits is not None:
        ax.set_ylim(-0.5, 2**n_bits - 0.5)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def dnl_figure(report):
    """Bar chart of DNL per rung gap, with the half-LSB guides."""
    dnl = np.asarray(report.dnl, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.bar(np.arange(dnl.size), dnl, width=0.8)
    ax.axhline(0.5, color="k", ls="--", lw=0.8)
    ax.axhline(-0.5, color="k", ls="--", lw=0.8)
    ax.set_xlabel("rung gap")
    ax.set_ylabel("DNL (LSB)")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    return fig


def drift_figure(report):
    """Worst threshold shift against operating temperature."""
    t = [e.t_c for e in report.entries]
    shift = [e.max_ref_shift for e in report.entries]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(t, shift, marker="o", lw=1.0)
    ax.axvline(report.t_ref_c, color="k", ls="--", lw=0.8)
    ax.set_xlabel("temperature (degC)")
    ax.set_ylabel("max threshold shift (V)")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def save_svg(fig, path) -> None:
    """Write an SVG with no creation date so re-runs are byte-identical."""
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
