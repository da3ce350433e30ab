"""SVG figures built from report data (non-interactive backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def rate_plot(report: dict, path) -> Path:
    """Log-log plot of the median error against ``n Delta`` with the fitted line."""
    cells = report["cells"]
    T = np.array([c["horizon"] for c in cells])
    med = np.array([c["median_error"] for c in cells])
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.errorbar(T, med, yerr=[c["median_error_se"] for c in cells], fmt="o", capsize=3, label="median error")
    reg = report.get("summary", {}).get("regression")
    if reg:
        ax.plot(T, np.exp(reg["intercept"]) * T ** reg["slope"], "-", label=f"slope {reg['slope']:.3f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n Delta")
    ax.set_ylabel("L2 error")
    ax.legend()
    return _save(fig, path)


def contraction_plot(report: dict, path) -> Path:
    cells = [c for c in report["cells"] if "mass" in c]
    n = [c["n"] for c in cells]
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(9, 4))
    a1.errorbar(n, [c["mass"] for c in cells], yerr=[c["mass_se"] for c in cells], fmt="o-", capsize=3)
    a1.set_xscale("log", base=2)
    a1.set_ylim(0, 1.05)
    a1.set_xlabel("n")
    a1.set_ylabel("posterior ball mass")
    a2.errorbar(n, [c["mean_error"] for c in cells], yerr=[c["mean_error_se"] for c in cells], fmt="o-", capsize=3)
    a2.set_xscale("log", base=2)
    a2.set_xlabel("n")
    a2.set_ylabel("posterior-mean L2 error")
    fig.tight_layout()
    return _save(fig, path)


def holder_plot(report: dict, path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 4))
    scales = sorted({c["sigma_scale"] for c in report["cells"]})
    for s in scales:
        cells = [c for c in report["cells"] if c["sigma_scale"] == s]
        ax.errorbar(
            [c["m"] for c in cells], [c["normalized"] for c in cells], yerr=[c["normalized_se"] for c in cells],
            fmt="o-", capsize=3, label=f"sigma x {s:g}",
        )
    ax.set_xscale("log")
    ax.set_xlabel("m")
    ax.set_ylabel("quantile / sqrt(log m)")
    ax.legend()
    return _save(fig, path)


def klcheck_plot(report: dict, path) -> Path:
    rows = [c for c in report["cells"] if c.get("radius", 0) > 0]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.errorbar(
        [r["radius"] for r in rows], [r["kl_over_delta_l2sq"] for r in rows],
        yerr=[r["kl_over_delta_l2sq_se"] for r in rows], fmt="o-", capsize=3,
    )
    ax.set_xlabel("||b - b0||_2")
    ax.set_ylabel("KL / (Delta ||b - b0||^2)")
    return _save(fig, path)


def trace_plot(logpost, levels, path) -> Path:
    fig, (a1, a2) = plt.subplots(2, 1, figsize=(7, 4), sharex=True)
    a1.plot(logpost, lw=0.5)
    a1.set_ylabel("log posterior")
    a2.plot(levels, lw=0.5, drawstyle="steps-post")
    a2.set_ylabel("resolution")
    a2.set_xlabel("iteration")
    return _save(fig, path)


def density_overlay(samples, density, path, bins: int = 64) -> Path:
    """Histogram of periodized samples against the invariant density."""
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.hist(np.mod(samples, 1.0), bins=bins, range=(0, 1), density=True, alpha=0.5, label="occupation")
    ax.plot(density.grid, density.values, "k-", label="invariant density")
    ax.set_xlabel("x mod 1")
    ax.legend()
    return _save(fig, path)


PLOTTERS = {"rate": rate_plot, "contraction": contraction_plot, "holder": holder_plot, "klcheck": klcheck_plot}
