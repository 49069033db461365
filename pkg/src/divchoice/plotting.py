"""Figures written next to the CSV tables of ``bench`` and ``repro appendixE``."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def plot_scaling(path: Path, sizes: Sequence[int], seconds: Sequence[float], n_schools: int) -> Path:
    """Log-log runtime with the quartic envelope anchored at the smallest size."""
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(sizes, seconds, "o-", label="measured")
    base = seconds[0] / sizes[0] ** 4
    env = [base * n**4 for n in sizes]
    ax.loglog(sizes, env, "--", label="|I|^4 envelope")
    ax.loglog(sizes, [2 * e for e in env], ":", label="2x envelope")
    ax.set_xlabel("students |I|")
    ax.set_ylabel("seconds")
    ax.set_title(f"mechanism runtime, |S| = {n_schools}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def plot_case_histogram(path: Path, histogram: dict, n_cases: int) -> Path:
    """Number of seat-order pairs by how many cases they get right."""
    xs = list(range(n_cases + 1))
    ys = [histogram.get(k, 0) for k in xs]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar(xs, ys)
    ax.set_xlabel("cases matching the optimal choice")
    ax.set_ylabel("seat-order pairs")
    ax.set_xticks(xs)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path
