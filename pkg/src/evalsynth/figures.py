"""Figure rendering for run reports.

Written next to the delimited quality summary so a run directory is
reviewable at a glance without the service running.
"""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .structure import FeedbackReport


def render_run_figures(
    figures_dir: str | Path,
    reports: list[FeedbackReport],
    responses_per_course: dict[str, int],
) -> list[Path]:
    figures_dir = Path(figures_dir)
    figures_dir.mkdir(parents=True, exist_ok=True)
    written = []
    written.append(_response_histogram(figures_dir, responses_per_course))
    if reports:
        written.append(_quality_scatter(figures_dir, reports))
        written.append(_flag_counts(figures_dir, reports))
    return written


def _response_histogram(figures_dir: Path, sizes: dict[str, int]) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    counts = sorted(sizes.values())
    ax.hist(counts, bins=range(1, max(counts) + 2), color="#4878a8", edgecolor="white")
    ax.set_xlabel("responses per course")
    ax.set_ylabel("courses")
    ax.set_title(f"Response volume across {len(counts)} courses")
    path = figures_dir / "responses_per_course.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _quality_scatter(figures_dir: Path, reports: list[FeedbackReport]) -> Path:
    fig, ax = plt.subplots(figsize=(6, 6))
    xs = [r.quality.factuality_score if r.quality else 0.0 for r in reports]
    ys = [r.quality.actionability_score if r.quality else 0.0 for r in reports]
    ax.scatter(xs, ys, alpha=0.6, color="#4878a8")
    ax.set_xlim(-0.05, 1.05)
    ax.set_ylim(-0.05, 1.05)
    ax.set_xlabel("factuality score")
    ax.set_ylabel("actionability score")
    ax.set_title("Per-course quality scores")
    path = figures_dir / "quality_scores.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _flag_counts(figures_dir: Path, reports: list[FeedbackReport]) -> Path:
    counts: Counter[str] = Counter()
    for report in reports:
        if report.quality:
            counts.update(f.kind.value for f in report.quality.flags)
    fig, ax = plt.subplots(figsize=(8, 4))
    kinds = sorted(counts)
    ax.barh(kinds, [counts[k] for k in kinds], color="#a85448")
    ax.set_xlabel("flag count")
    ax.set_title("Quality flags across the run")
    path = figures_dir / "flag_counts.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
