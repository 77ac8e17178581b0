"""Figure rendering for experiment outputs.

Renders cumulative-regret and cumulative-clicks curves (averaged over seeds)
and a CPC bar chart into PNG files next to the CSV output.  The CSVs remain
the primary, plot-ready interface; these figures are a convenience view.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

FIGURE_NAMES = ("cum_regret.png", "cum_clicks.png", "cpc.png")


def _curve_figure(path: Path, curves: dict[str, "np.ndarray"], key: str, ylabel: str) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name, series in curves.items():
        ax.plot(series[key], label=name, linewidth=1.4)
    ax.set_xlabel("day")
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_figures(out_dir, summary: dict[str, dict[str, float]], curves) -> list[Path]:
    """Write the three standard figures and return their paths."""
    out = Path(out_dir)
    paths = [out / name for name in FIGURE_NAMES]

    _curve_figure(paths[0], curves, "cum_regret", "cumulative regret (seed mean)")
    _curve_figure(paths[1], curves, "cum_clicks", "cumulative clicks (seed mean)")

    fig, ax = plt.subplots(figsize=(7, 4.5))
    names = list(summary)
    means = [summary[n]["cpc_mean"] for n in names]
    stds = [summary[n]["cpc_std"] for n in names]
    ax.bar(range(len(names)), means, yerr=stds, capsize=3)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("cost per click")
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(paths[2], dpi=120)
    plt.close(fig)
    return paths
