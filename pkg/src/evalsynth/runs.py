"""On-disk layout of a pipeline run.

A run directory holds one JSON report and one summary text file per course,
a manifest with the config snapshot and per-course outcomes, the rating log,
and a delimited quality summary with rendered figures:

    runs/<run_id>/reports/<course_id>.json
    runs/<run_id>/summaries/<course_id>.txt
    runs/<run_id>/manifest.json
    runs/<run_id>/ratings.jsonl
    runs/<run_id>/quality_summary.csv
    runs/<run_id>/figures/*.png
"""

from __future__ import annotations

import csv
import hashlib
import json
import re
from datetime import datetime, timezone
from pathlib import Path

from .errors import ConfigError, RunNotFound
from .pipeline import RunManifest, SummaryDraft
from .structure import FeedbackReport, ItemKind, report_from_dict, report_to_json

BUDGET_HEURISTIC_NOTE = "X = clamp(floor(0.25 * input_estimate), 128, 512); chars/4 token estimate"

_SAFE_ID = re.compile(r"^[A-Za-z0-9._-]+$")
_UNSAFE_CHARS = re.compile(r"[^A-Za-z0-9._-]")


def new_run_id(corpus_path: str | Path) -> str:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    digest = hashlib.sha256(Path(corpus_path).read_bytes()).hexdigest()[:8]
    return f"{stamp}-{digest}"


def course_filename(course_id: str) -> str:
    """Filesystem-safe stem for a course id.

    Hostile characters are replaced and a short digest is appended so
    distinct ids ("a/b" vs "a_b") can never collide on disk.
    """
    if _SAFE_ID.match(course_id) and course_id not in (".", ".."):
        return course_id
    digest = hashlib.sha256(course_id.encode("utf-8")).hexdigest()[:8]
    cleaned = _UNSAFE_CHARS.sub("_", course_id).strip("._") or "course"
    return f"{cleaned}-{digest}"


class RunPaths:
    def __init__(self, out_dir: str | Path, run_id: str):
        if not _SAFE_ID.match(run_id) or run_id in (".", ".."):
            raise ConfigError(
                f"run id {run_id!r} must contain only letters, digits, '.', '_', '-'"
            )
        self.run_id = run_id
        self.root = Path(out_dir) / run_id
        self.reports_dir = self.root / "reports"
        self.summaries_dir = self.root / "summaries"
        self.figures_dir = self.root / "figures"
        self.manifest_path = self.root / "manifest.json"
        self.ratings_path = self.root / "ratings.jsonl"
        self.summary_csv_path = self.root / "quality_summary.csv"

    def report_path(self, course_id: str) -> Path:
        return self.reports_dir / f"{course_filename(course_id)}.json"

    def summary_path(self, course_id: str) -> Path:
        return self.summaries_dir / f"{course_filename(course_id)}.txt"


def write_run(
    out_dir: str | Path,
    manifest: RunManifest,
    reports: list[FeedbackReport],
    drafts: dict[str, SummaryDraft],
) -> RunPaths:
    paths = RunPaths(out_dir, manifest.run_id)
    if paths.root.exists():
        raise FileExistsError(f"run directory already exists: {paths.root}")
    paths.reports_dir.mkdir(parents=True)
    paths.summaries_dir.mkdir(parents=True)

    for report in reports:
        paths.report_path(report.course_id).write_text(
            report_to_json(report), encoding="utf-8"
        )
    for course_id, draft in drafts.items():
        paths.summary_path(course_id).write_text(draft.text, encoding="utf-8")

    manifest_data = {
        "run_id": manifest.run_id,
        "config": manifest.config,
        "outcomes": manifest.outcomes,
        "report_count": len(reports),
    }
    paths.manifest_path.write_text(
        json.dumps(manifest_data, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    write_quality_summary(paths, reports)
    return paths


def write_quality_summary(paths: RunPaths, reports: list[FeedbackReport]) -> None:
    with paths.summary_csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "course_id",
                "format",
                "items",
                "action_items",
                "factuality_score",
                "actionability_score",
                "flags",
            ]
        )
        for report in reports:
            qa = report.quality
            writer.writerow(
                [
                    report.course_id,
                    report.format.value,
                    len(report.items),
                    sum(1 for it in report.items if it.kind is ItemKind.ACTION),
                    f"{qa.factuality_score:.4f}" if qa else "",
                    f"{qa.actionability_score:.4f}" if qa else "",
                    ";".join(f.kind.value for f in qa.flags) if qa else "",
                ]
            )


def list_runs(out_dir: str | Path) -> list[str]:
    out = Path(out_dir)
    if not out.is_dir():
        return []
    return sorted(
        p.name for p in out.iterdir() if (p / "manifest.json").is_file()
    )


def load_manifest(out_dir: str | Path, run_id: str) -> dict:
    paths = RunPaths(out_dir, run_id)
    if not paths.manifest_path.is_file():
        raise RunNotFound(f"no manifest in {paths.root}")
    return json.loads(paths.manifest_path.read_text(encoding="utf-8"))


def load_report(out_dir: str | Path, run_id: str, course_id: str) -> FeedbackReport:
    path = RunPaths(out_dir, run_id).report_path(course_id)
    if not path.is_file():
        raise RunNotFound(f"no report for course {course_id!r} in run {run_id!r}")
    return report_from_dict(json.loads(path.read_text(encoding="utf-8")))


def load_reports(out_dir: str | Path, run_id: str) -> list[FeedbackReport]:
    paths = RunPaths(out_dir, run_id)
    if not paths.reports_dir.is_dir():
        raise RunNotFound(f"no reports directory in {paths.root}")
    reports = []
    for path in sorted(paths.reports_dir.glob("*.json")):
        reports.append(report_from_dict(json.loads(path.read_text(encoding="utf-8"))))
    return reports


def report_id(run_id: str, course_id: str) -> str:
    return f"{run_id}:{course_id}"


def known_report_ids(out_dir: str | Path, run_id: str) -> set[str]:
    manifest = load_manifest(out_dir, run_id)
    return {
        report_id(run_id, course_id)
        for course_id, outcome in manifest.get("outcomes", {}).items()
        if outcome.get("status") == "OK"
    }
