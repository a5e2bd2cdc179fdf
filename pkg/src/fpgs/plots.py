"""Figure rendering for experiment reports.

CSV stays the canonical output; these helpers draw the matching picture
next to it (same stem, .png).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

MARKERS = ("o", "s", "^", "v", "D", "x", "*")


def plot_experiment(rows, path, title=None) -> None:
    """Schedulability ratio vs. total utilization, one curve per algorithm."""
    by_algorithm: dict = {}
    for u, algorithm, _count, _total, ratio in rows:
        by_algorithm.setdefault(algorithm, []).append((u, ratio))
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for i, (algorithm, points) in enumerate(by_algorithm.items()):
        points.sort()
        ax.plot([p[0] for p in points], [p[1] for p in points],
                marker=MARKERS[i % len(MARKERS)], label=algorithm)
    ax.set_xlabel("taskset utilization")
    ax.set_ylabel("schedulability ratio")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_table1(rows, path, mode: str) -> None:
    """Schedulable fractions vs. taskset size, log scale for the fraction."""
    ns = [r[0] for r in rows]
    fractions = [r[1] for r in rows]
    dm = [r[2] for r in rows]
    label = "all permutations" if mode == "exhaustive" else "random permutations"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(ns, fractions, marker="o", label=label)
    ax.plot(ns, dm, marker="s", label="schedulable by DM")
    positive = [f for f in fractions + dm if f > 0]
    if positive and min(positive) < 0.05:
        ax.set_yscale("log")
    ax.set_xlabel("tasks per set")
    ax.set_ylabel("schedulable fraction")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
