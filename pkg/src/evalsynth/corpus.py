"""Corpus loading: group raw evaluation responses into per-course bundles.

Input is a UTF-8 CSV with the exact header
``course_id,response_id,text,respondent_name`` (respondent_name may be
empty).  An optional roster CSV (``course_id,person_name``) supplies the
person names used for redaction downstream.  Respondent names from the
corpus file feed the same redaction roster and are never emitted anywhere
else.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import DuplicateResponseId, EmptyCorpus, MalformedRow

CORPUS_HEADER = ["course_id", "response_id", "text", "respondent_name"]
ROSTER_HEADER = ["course_id", "person_name"]

# Closed word lists for the language tag; counts of whole-word hits decide.
_DANISH_CUES = ("og", "ikke", "det", "er", "at")
_ENGLISH_CUES = ("the", "and", "is", "of", "to")


class LanguageHint(str, Enum):
    EN = "EN"
    DA = "DA"
    MIXED = "MIXED"
    UNKNOWN = "UNKNOWN"


@dataclass
class EvaluationResponse:
    """One student's free-text answer for one course."""

    response_id: str
    course_id: str
    text: str
    language_hint: LanguageHint = LanguageHint.UNKNOWN
    respondent_name: str | None = None


@dataclass
class CourseBundle:
    """All responses for one course, in stable ingestion order."""

    course_id: str
    responses: list[EvaluationResponse]
    roster: set[str] = field(default_factory=set)
    term_label: str | None = None

    def __post_init__(self) -> None:
        if not self.responses:
            raise ValueError(f"bundle {self.course_id!r} has no responses")
        for r in self.responses:
            if r.course_id != self.course_id:
                raise ValueError(
                    f"response {r.response_id!r} belongs to {r.course_id!r}, "
                    f"not {self.course_id!r}"
                )


@dataclass
class CorpusStats:
    course_count: int
    response_count: int
    min_responses_per_course: int
    max_responses_per_course: int
    singleton_course_count: int


def guess_language(text: str) -> LanguageHint:
    """Tag text as EN/DA/MIXED/UNKNOWN from closed function-word lists.

    MIXED needs at least two hits on both sides; no hits at all (or an
    unresolvable tie) gives UNKNOWN.
    """
    words = re.findall(r"[^\W\d_]+", text.lower())
    da = sum(1 for w in words if w in _DANISH_CUES)
    en = sum(1 for w in words if w in _ENGLISH_CUES)
    if da >= 2 and en >= 2:
        return LanguageHint.MIXED
    if da > en:
        return LanguageHint.DA
    if en > da:
        return LanguageHint.EN
    return LanguageHint.UNKNOWN


def load_roster(path: str | Path) -> dict[str, set[str]]:
    """Read a roster CSV into a course_id -> set-of-names mapping."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"roster file not found: {path}")
    roster: dict[str, set[str]] = {}
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ROSTER_HEADER:
            raise MalformedRow(1, f"expected roster header {ROSTER_HEADER}, got {header}")
        for row_num, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise MalformedRow(row_num, f"expected 2 fields, got {len(row)}")
            course_id, name = row[0].strip(), row[1].strip()
            if not course_id or not name:
                raise MalformedRow(row_num, "course_id and person_name must be non-empty")
            roster.setdefault(course_id, set()).add(name)
    return roster


def load_corpus(
    path: str | Path, roster_path: str | Path | None = None
) -> list[CourseBundle]:
    """Load the corpus CSV and group responses into one bundle per course.

    Bundles appear in order of first occurrence of their course_id and
    responses keep file order.  Duplicate (course, text) rows are kept on
    purpose: students can submit identical text, and dropping rows would
    silently change counts.

    Raises:
        FileNotFoundError: the corpus (or roster) file does not exist.
        MalformedRow: header mismatch, bad field count, or empty text.
        DuplicateResponseId: the same response_id appears twice.
        EmptyCorpus: the file holds a header but no data rows.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"corpus file not found: {path}")
    roster = load_roster(roster_path) if roster_path is not None else {}

    order: list[str] = []
    grouped: dict[str, list[EvaluationResponse]] = {}
    seen_ids: set[str] = set()

    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CORPUS_HEADER:
            raise MalformedRow(1, f"expected header {CORPUS_HEADER}, got {header}")
        for row_num, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise MalformedRow(row_num, f"expected 4 fields, got {len(row)}")
            course_id, response_id, text, respondent = (c.strip() for c in row)
            if not course_id:
                raise MalformedRow(row_num, "course_id must be non-empty")
            if not response_id:
                raise MalformedRow(row_num, "response_id must be non-empty")
            if not text:
                raise MalformedRow(row_num, "text must be non-empty after trimming")
            if response_id in seen_ids:
                raise DuplicateResponseId(response_id, row_num)
            seen_ids.add(response_id)
            response = EvaluationResponse(
                response_id=response_id,
                course_id=course_id,
                text=text,
                language_hint=guess_language(text),
                respondent_name=respondent or None,
            )
            if course_id not in grouped:
                grouped[course_id] = []
                order.append(course_id)
            grouped[course_id].append(response)

    if not order:
        raise EmptyCorpus(f"no data rows in {path}")

    bundles = []
    for course_id in order:
        responses = grouped[course_id]
        names = set(roster.get(course_id, set()))
        names.update(r.respondent_name for r in responses if r.respondent_name)
        bundles.append(CourseBundle(course_id=course_id, responses=responses, roster=names))
    return bundles


def corpus_stats(bundles: list[CourseBundle]) -> CorpusStats:
    """Exact per-course counts over a non-empty bundle list."""
    if not bundles:
        raise EmptyCorpus("no bundles to summarise")
    sizes = [len(b.responses) for b in bundles]
    return CorpusStats(
        course_count=len(bundles),
        response_count=sum(sizes),
        min_responses_per_course=min(sizes),
        max_responses_per_course=max(sizes),
        singleton_course_count=sum(1 for s in sizes if s == 1),
    )
