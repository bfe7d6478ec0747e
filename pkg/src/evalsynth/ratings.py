"""Human Likert ratings: append-only storage, agreement, divergence.

Ratings land in a line-delimited JSON log, one record per line, and are
never mutated: re-rating the same (rater, report, dimension) appends a new
record and the highest sequence wins.  Agreement is summarised per dimension
with exact pairwise agreement, mean absolute difference on the same pairs,
and Krippendorff's alpha with ordinal difference weights.
"""

from __future__ import annotations

import json
import os
import threading
from collections import Counter, defaultdict
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from itertools import combinations
from pathlib import Path
from typing import Iterable

from .errors import InsufficientRaters, InvalidScore, RatingError, UnknownReport

DEFAULT_DIVERGENCE_RANGE = 2


class Dimension(str, Enum):
    FACTUALITY = "FACTUALITY"
    ACTIONABILITY = "ACTIONABILITY"
    APPROPRIATENESS = "APPROPRIATENESS"


@dataclass(frozen=True)
class LikertRating:
    rater_id: str
    report_id: str
    dimension: Dimension
    score: int
    comment: str | None = None
    recorded_at: str | None = None  # RFC 3339; assigned at record time if absent
    sequence: int = 0


@dataclass(frozen=True)
class AgreementStats:
    dimension: Dimension
    n_reports: int
    n_raters: int
    exact_agreement_rate: float
    mean_abs_diff: float
    krippendorff_alpha_ordinal: float


@dataclass(frozen=True)
class DivergenceEntry:
    report_id: str
    dimension: Dimension
    scores: list[tuple[str, int]]
    range: int


def _now_rfc3339() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def rating_to_json(rating: LikertRating) -> str:
    return json.dumps(
        {
            "seq": rating.sequence,
            "rater": rating.rater_id,
            "report": rating.report_id,
            "dim": rating.dimension.value,
            "score": rating.score,
            "comment": rating.comment or "",
            "at": rating.recorded_at or "",
        },
        ensure_ascii=False,
    )


def rating_from_json(line: str) -> LikertRating:
    data = json.loads(line)
    return LikertRating(
        rater_id=data["rater"],
        report_id=data["report"],
        dimension=Dimension(data["dim"]),
        score=int(data["score"]),
        comment=data.get("comment") or None,
        recorded_at=data.get("at") or None,
        sequence=int(data.get("seq", 0)),
    )


def effective_ratings(
    records: Iterable[LikertRating],
) -> dict[tuple[str, str, Dimension], LikertRating]:
    """Latest-wins resolution per (rater, report, dimension)."""
    effective: dict[tuple[str, str, Dimension], LikertRating] = {}
    for rating in records:
        key = (rating.rater_id, rating.report_id, rating.dimension)
        current = effective.get(key)
        if current is None or rating.sequence >= current.sequence:
            effective[key] = rating
    return effective


def _units_for_dimension(
    records: Iterable[LikertRating], dimension: Dimension
) -> dict[str, dict[str, int]]:
    """report_id -> {rater_id: effective score} for one dimension."""
    units: dict[str, dict[str, int]] = defaultdict(dict)
    for (rater, report, dim), rating in effective_ratings(records).items():
        if dim is dimension:
            units[report][rater] = rating.score
    return units


def ordinal_alpha(units: list[list[int]]) -> float:
    """Krippendorff's alpha, ordinal weights, coincidence-matrix form.

    ``units`` holds the scores per report; only units with two or more
    scores are pairable.  Returns 1.0 when there is no expected disagreement
    (all pairable scores identical).
    """
    pairable = [u for u in units if len(u) >= 2]
    marginals: Counter[int] = Counter()
    for unit in pairable:
        marginals.update(unit)
    n = sum(marginals.values())
    if n == 0:
        raise RatingError("no pairable scores")

    coincidence: dict[tuple[int, int], float] = defaultdict(float)
    for unit in pairable:
        m = len(unit)
        counts = Counter(unit)
        for c in counts:
            for k in counts:
                pairs = counts[c] * counts[k] - (counts[c] if c == k else 0)
                if pairs:
                    coincidence[(c, k)] += pairs / (m - 1)

    categories = sorted(marginals)

    def delta_sq(c: int, k: int) -> float:
        lo, hi = min(c, k), max(c, k)
        between = sum(marginals[g] for g in categories if lo <= g <= hi)
        return (between - (marginals[c] + marginals[k]) / 2) ** 2

    observed = sum(count * delta_sq(c, k) for (c, k), count in coincidence.items()) / n
    expected = sum(
        marginals[c] * marginals[k] * delta_sq(c, k)
        for c in categories
        for k in categories
        if c != k
    ) / (n * (n - 1))
    if expected == 0:
        return 1.0
    return 1.0 - observed / expected


def agreement_stats(
    records: Iterable[LikertRating], dimension: Dimension
) -> AgreementStats:
    """Per-dimension agreement over effective ratings.

    Reports rated by fewer than two raters are excluded.  Exact agreement
    and mean absolute difference are computed per report over rater pairs,
    then averaged across reports.
    """
    units = {
        report: scores
        for report, scores in _units_for_dimension(records, dimension).items()
        if len(scores) >= 2
    }
    if not units:
        raise InsufficientRaters(
            f"need >= 2 raters on >= 1 common report for {dimension.value}"
        )

    agreement_rates = []
    abs_diffs = []
    raters: set[str] = set()
    for scores in units.values():
        raters.update(scores)
        pairs = list(combinations(scores.values(), 2))
        agreement_rates.append(sum(1 for a, b in pairs if a == b) / len(pairs))
        abs_diffs.append(sum(abs(a - b) for a, b in pairs) / len(pairs))

    alpha = ordinal_alpha([list(scores.values()) for scores in units.values()])
    return AgreementStats(
        dimension=dimension,
        n_reports=len(units),
        n_raters=len(raters),
        exact_agreement_rate=sum(agreement_rates) / len(agreement_rates),
        mean_abs_diff=sum(abs_diffs) / len(abs_diffs),
        krippendorff_alpha_ordinal=alpha,
    )


def divergence_queue(
    records: Iterable[LikertRating], min_range: int = DEFAULT_DIVERGENCE_RANGE
) -> list[DivergenceEntry]:
    """Every (report, dimension) whose effective scores span >= min_range."""
    entries = []
    for dimension in Dimension:
        for report, scores in _units_for_dimension(records, dimension).items():
            if len(scores) < 2:
                continue
            spread = max(scores.values()) - min(scores.values())
            if spread >= min_range:
                entries.append(
                    DivergenceEntry(
                        report_id=report,
                        dimension=dimension,
                        scores=sorted(scores.items()),
                        range=spread,
                    )
                )
    entries.sort(key=lambda e: (-e.range, e.report_id, e.dimension.value))
    return entries


class RatingStore:
    """Append-only rating log with a single serialized writer.

    Readers always see a consistent snapshot: records are immutable and the
    in-memory list only grows.
    """

    def __init__(self, path: str | Path, known_reports: set[str] | None = None):
        self.path = Path(path)
        self.known_reports = known_reports
        self._records: list[LikertRating] = []
        self._lock = threading.Lock()
        if self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        self._records.append(rating_from_json(line))

    @property
    def records(self) -> list[LikertRating]:
        return list(self._records)

    def record_rating(self, rating: LikertRating) -> int:
        """Append one rating; returns the assigned sequence number."""
        if not isinstance(rating.score, int) or not 1 <= rating.score <= 5:
            raise InvalidScore(f"score must be an integer in [1, 5], got {rating.score!r}")
        if self.known_reports is not None and rating.report_id not in self.known_reports:
            raise UnknownReport(f"unknown report_id {rating.report_id!r}")
        with self._lock:
            # strictly above every stored sequence, even if the log has gaps
            sequence = max((r.sequence for r in self._records), default=0) + 1
            stored = LikertRating(
                rater_id=rating.rater_id,
                report_id=rating.report_id,
                dimension=rating.dimension,
                score=rating.score,
                comment=rating.comment,
                recorded_at=rating.recorded_at or _now_rfc3339(),
                sequence=sequence,
            )
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(rating_to_json(stored) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._records.append(stored)
        return sequence

    def effective(self) -> dict[tuple[str, str, Dimension], LikertRating]:
        return effective_ratings(self._records)

    def agreement_stats(self, dimension: Dimension) -> AgreementStats:
        return agreement_stats(self._records, dimension)

    def divergence_queue(self, min_range: int = DEFAULT_DIVERGENCE_RANGE) -> list[DivergenceEntry]:
        return divergence_queue(self._records, min_range)

    def export_ratings(self, path: str | Path) -> int:
        """Write the rating log verbatim; returns the record count."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        if self.path.exists():
            path.write_bytes(self.path.read_bytes())
        else:
            path.write_text("", encoding="utf-8")
        return len(self._records)

    def import_file(self, path: str | Path) -> int:
        """Replay rating records from a log file; sequences are reassigned."""
        count = 0
        with Path(path).open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                self.record_rating(rating_from_json(line))
                count += 1
        return count
