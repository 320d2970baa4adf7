"""Figures for simulation reports, written as PNG next to the CSV."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .simnet import SimReport, sim_metrics  # noqa: E402


def tradeoff_curve(B: int, k: int, d: int, points: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Smallest per-node storage alpha for each repair bandwidth gamma = d beta.

    Real-valued relaxation of the cut-set bound for a file of size B.
    """
    gamma_min = 2 * B * d / (k * (2 * d - k + 1))  # the MBR end
    gamma_max = B * d / (k * (d - k + 1))  # the MSR end
    gammas = np.linspace(gamma_min, max(gamma_max, gamma_min) * 1.15, points)
    alphas = []
    for g in gammas:
        beta = g / d
        lo, hi = 0.0, float(B)
        for _ in range(60):
            mid = (lo + hi) / 2
            if sum(min(mid, (d - i) * beta) for i in range(k)) >= B:
                hi = mid
            else:
                lo = mid
        alphas.append(hi)
    return gammas, np.array(alphas)


def plot_bandwidth(report: SimReport, path) -> Path:
    rows = sim_metrics(report)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    labels = [f"#{r.seq} n{r.node}" for r in rows]
    x = np.arange(len(rows))
    ax.bar(x - 0.2, [r.repair_bytes for r in rows], width=0.4, label="regenerating repair")
    ax.bar(x + 0.2, [r.naive_bytes for r in rows], width=0.4, label="download whole file")
    ax.set_xticks(x)
    ax.set_xticklabels(labels)
    ax.set_ylabel("bytes downloaded")
    ax.set_title(f"repair traffic, {report.label}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def plot_tradeoff(report: SimReport, path) -> Path:
    gammas, alphas = tradeoff_curve(report.B, report.k, report.d)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(gammas, alphas, label="cut-set bound")
    ax.plot([report.d], [report.alpha], "o", label=f"{report.label}")
    ax.set_xlabel("repair bandwidth d*beta (symbols)")
    ax.set_ylabel("storage per node alpha (symbols)")
    ax.set_title(f"B={report.B}, k={report.k}, d={report.d}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def write_figures(report: SimReport, out_dir, stem: str = "report") -> list[Path]:
    out_dir = Path(out_dir)
    return [plot_bandwidth(report, out_dir / f"{stem}_bandwidth.png"),
            plot_tradeoff(report, out_dir / f"{stem}_tradeoff.png")]
