"""Figure rendering for the report-producing pipeline stages.

Every report CSV the CLI writes gets a PNG next to it: the calibration
report becomes the two-panel bin plot (counts on top, predicted vs.
empirical defendant win rate with bootstrap error bars below), the density
sweep becomes recovery accuracy vs. Q, and the ranking comparison becomes
a bar chart of balanced accuracies.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluate import CalibrationReport
from .fileio import atomic_path


def save_calibration_figure(report: CalibrationReport, path) -> None:
    centers = np.arange(1, len(report.bins) + 1)
    counts = [b.n_cases for b in report.bins]
    predicted = [b.mean_predicted for b in report.bins]
    empirical = [b.empirical_defendant_winrate for b in report.bins]
    sds = [b.bootstrap_sd for b in report.bins]

    fig, (ax_top, ax_bottom) = plt.subplots(
        2, 1, figsize=(7, 6), sharex=True, gridspec_kw={"height_ratios": [1, 2]}
    )
    ax_top.bar(centers, counts, color="#8fb8de", edgecolor="black", linewidth=0.5)
    ax_top.set_ylabel("cases")

    ax_bottom.plot(centers, predicted, "s-", color="#2465a8", label="predicted propensity")
    ax_bottom.errorbar(
        centers,
        empirical,
        yerr=sds,
        fmt="o",
        color="#c23b22",
        capsize=3,
        label="empirical win rate",
    )
    ax_bottom.axhline(
        report.baseline_winrate,
        linestyle=":",
        color="gray",
        label=f"baseline ({report.baseline_winrate:.0%})",
    )
    ax_bottom.set_xlabel("propensity bin")
    ax_bottom.set_ylabel("defendant win rate")
    ax_bottom.set_ylim(0, 1)
    ax_bottom.set_xticks(centers)
    ax_bottom.legend(loc="best", fontsize=9)
    fig.tight_layout()
    with atomic_path(path) as tmp:
        fig.savefig(tmp, format="png", dpi=150)
    plt.close(fig)


def save_sweep_figure(rows, path) -> None:
    """Recovery accuracy vs. density target, averaged over replicates."""
    feasible = [r for r in rows if r.feasible]
    targets = sorted({r.q_target for r in feasible})
    means, sds = [], []
    for t in targets:
        taus = [r.kendall_tau for r in feasible if r.q_target == t]
        means.append(float(np.mean(taus)))
        sds.append(float(np.std(taus, ddof=1)) if len(taus) > 1 else 0.0)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(targets, means, yerr=sds, fmt="o-", color="#2465a8", capsize=3)
    ax.set_xlabel("density target Q (interactions per entity)")
    ax.set_ylabel("Kendall tau vs. ground truth")
    ax.set_ylim(0, 1)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    with atomic_path(path) as tmp:
        fig.savefig(tmp, format="png", dpi=150)
    plt.close(fig)


def save_accuracy_figure(entries, path) -> None:
    """Balanced accuracies per scoring, with bootstrap error bars.

    ``entries`` is a list of (name, accuracy, sd).
    """
    names = [name for name, _, _ in entries]
    accs = [acc for _, acc, _ in entries]
    sds = [sd for _, _, sd in entries]
    xs = np.arange(len(entries))

    fig, ax = plt.subplots(figsize=(max(5, 1.6 * len(entries)), 4))
    ax.bar(xs, accs, yerr=sds, capsize=4, color="#8fb8de", edgecolor="black", linewidth=0.5)
    ax.axhline(0.5, linestyle=":", color="gray", label="random baseline")
    ax.set_xticks(xs)
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_ylabel("balanced accuracy")
    ax.set_ylim(0, 1)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    with atomic_path(path) as tmp:
        fig.savefig(tmp, format="png", dpi=150)
    plt.close(fig)
