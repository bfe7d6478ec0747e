"""Classify generated feedback into its emergent format and parse it.

Models answer the second-stage prompt in a handful of recurring shapes:
plain numbered points, letter-style sections (strengths / areas for
improvement / ...), or a summary block followed by a heading that introduces
the recommended actions.  ``classify_format`` tags the shape and
``parse_report`` extracts ordered feedback items with exact source spans, so
the raw text is always reconstructible.  The parser is total: any string
yields a report, falling back to one whole-text item.

Source spans are [start, end) offsets into the UTF-8 encoding of the raw
text.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .quality import QualityAssessment


class FormatClass(str, Enum):
    ENUMERATED_POINTS = "ENUMERATED_POINTS"
    LETTER_SECTIONS = "LETTER_SECTIONS"
    SUMMARY_THEN_ACTIONS = "SUMMARY_THEN_ACTIONS"
    UNSTRUCTURED = "UNSTRUCTURED"


class ItemKind(str, Enum):
    OBSERVATION = "OBSERVATION"
    ACTION = "ACTION"


@dataclass
class FeedbackItem:
    ordinal: int
    kind: ItemKind
    title: str | None
    body: str
    source_span: tuple[int, int]


@dataclass
class FeedbackReport:
    course_id: str
    format: FormatClass
    items: list[FeedbackItem]
    raw_text: str
    preamble: str | None = None
    closing: str | None = None
    quality: "QualityAssessment | None" = None


_ITEM_START = re.compile(r"^(\s*)(\d+\.|[-*•])\s+")
_NUMBERED_START = re.compile(r"^\s*\d+\.\s")
_ACTION_KEYWORDS = re.compile(r"actionable|recommend|suggestion", re.IGNORECASE)
_SECTION_HEADING = re.compile(
    r"^\s*(?:\*\*)?\s*"
    r"(strengths|areas?\s+for\s+improvement|positive\s+feedback|recommendations?)"
    r"\s*:?\s*(?:\*\*)?\s*:?\s*$",
    re.IGNORECASE,
)
_OBSERVATION_SECTIONS = ("strengths", "positive feedback")
_BOLD_TITLE = re.compile(r"^\*\*\s*(.+?)\s*\*\*\s*:?\s*", re.DOTALL)


@dataclass
class _Line:
    start: int  # codepoint offset of the line's first character
    text: str   # without the trailing newline

    @property
    def content_start(self) -> int:
        return self.start + len(self.text) - len(self.text.lstrip())

    @property
    def content_end(self) -> int:
        return self.start + len(self.text.rstrip())


def _split_lines(raw: str) -> list[_Line]:
    lines = []
    offset = 0
    for text in raw.split("\n"):
        lines.append(_Line(offset, text))
        offset += len(text) + 1
    return lines


def _is_item(line: _Line) -> bool:
    return bool(_ITEM_START.match(line.text))


def _is_action_heading(line: _Line) -> bool:
    stripped = line.text.strip()
    if not stripped or len(stripped) > 100 or _is_item(line):
        return False
    if stripped[-1] in ".!?":
        return False
    # letter-section vocabulary ("Recommendations:", ...) belongs to the
    # letter shape, not to the summary-then-actions split
    if _SECTION_HEADING.match(line.text):
        return False
    return bool(_ACTION_KEYWORDS.search(stripped))


def _section_name(line: _Line) -> str | None:
    m = _SECTION_HEADING.match(line.text)
    if not m or _is_item(line):
        return None
    return re.sub(r"\s+", " ", m.group(1).lower())


def _split_heading_index(lines: list[_Line]) -> int | None:
    """Index of the first action heading with an item before it and any
    content after it; None when the summary-then-actions shape is absent."""
    item_idx = [i for i, ln in enumerate(lines) if _is_item(ln)]
    if not item_idx:
        return None
    for i, line in enumerate(lines):
        if not _is_action_heading(line):
            continue
        if item_idx[0] < i and any(ln.text.strip() for ln in lines[i + 1:]):
            return i
    return None


def classify_format(raw: str) -> FormatClass:
    """Tag raw feedback text with its emergent format.

    Precedence: SUMMARY_THEN_ACTIONS > LETTER_SECTIONS > ENUMERATED_POINTS.
    Salutations do not decide the class; the split heading and section
    headings do.
    """
    lines = _split_lines(raw)
    if _split_heading_index(lines) is not None:
        return FormatClass.SUMMARY_THEN_ACTIONS
    if sum(1 for ln in lines if _section_name(ln)) >= 2:
        return FormatClass.LETTER_SECTIONS
    if sum(1 for ln in lines if _NUMBERED_START.match(ln.text)) >= 2:
        return FormatClass.ENUMERATED_POINTS
    return FormatClass.UNSTRUCTURED


def _byte_offsets(raw: str) -> list[int]:
    offsets = [0]
    total = 0
    for ch in raw:
        total += len(ch.encode("utf-8"))
        offsets.append(total)
    return offsets


def _item_blocks(lines: list[_Line], boundaries: set[int]) -> list[tuple[int, int, int]]:
    """(start_line, last_content_line, span_start) for every item block.

    An item runs from its marker line until the next boundary line, a blank
    line, or the end of text.
    """
    blocks = []
    i = 0
    while i < len(lines):
        if not _is_item(lines[i]):
            i += 1
            continue
        last = i
        j = i + 1
        while j < len(lines) and j not in boundaries and not _is_item(lines[j]):
            if not lines[j].text.strip():
                break
            last = j
            j += 1
        blocks.append((i, last, lines[i].content_start))
        i = last + 1
    return blocks


def parse_report(raw: str, course_id: str) -> FeedbackReport:
    """Parse raw feedback text into a structured report.  Total: never raises.

    Numbered and bulleted lines open items; a leading ``**bold**`` prefix
    becomes the item title.  Text before the first item is the preamble,
    trailing prose after the last item the closing.  Unstructured text yields
    a single whole-text observation.
    """
    fmt = classify_format(raw)
    byte_at = _byte_offsets(raw)

    if fmt is FormatClass.UNSTRUCTURED:
        items = []
        if raw.strip():
            items.append(
                FeedbackItem(
                    ordinal=1,
                    kind=ItemKind.OBSERVATION,
                    title=None,
                    body=raw,
                    source_span=(0, byte_at[len(raw)]),
                )
            )
        return FeedbackReport(course_id=course_id, format=fmt, items=items, raw_text=raw)

    lines = _split_lines(raw)
    split_idx = _split_heading_index(lines) if fmt is FormatClass.SUMMARY_THEN_ACTIONS else None

    boundaries: set[int] = set()
    if split_idx is not None:
        boundaries.add(split_idx)
    section_kinds: dict[int, ItemKind] = {}
    if fmt is FormatClass.LETTER_SECTIONS:
        for i, ln in enumerate(lines):
            name = _section_name(ln)
            if name:
                boundaries.add(i)
                section_kinds[i] = (
                    ItemKind.OBSERVATION
                    if name in _OBSERVATION_SECTIONS
                    else ItemKind.ACTION
                )

    items: list[FeedbackItem] = []
    cp_spans: list[tuple[int, int]] = []
    for start_line, last_line, span_start in _item_blocks(lines, boundaries):
        span_end = lines[last_line].content_end
        content = raw[span_start:span_end]
        marker = _ITEM_START.match(content)
        if marker:
            content = content[marker.end():]
        title = None
        m = _BOLD_TITLE.match(content)
        if m:
            title = m.group(1).rstrip(":").strip() or None
            content = content[m.end():]
        body = content.strip()
        if not body and title:
            body = title
        if not body:
            continue

        if fmt is FormatClass.SUMMARY_THEN_ACTIONS:
            kind = ItemKind.OBSERVATION if start_line < split_idx else ItemKind.ACTION
        elif fmt is FormatClass.LETTER_SECTIONS:
            kind = ItemKind.OBSERVATION
            for i in sorted(section_kinds):
                if i < start_line:
                    kind = section_kinds[i]
        else:
            kind = ItemKind.ACTION

        items.append(
            FeedbackItem(
                ordinal=len(items) + 1,
                kind=kind,
                title=title,
                body=body,
                source_span=(byte_at[span_start], byte_at[span_end]),
            )
        )
        cp_spans.append((span_start, span_end))

    if not items:
        # Structured shape detected but no usable item content survived.
        body = raw.strip()
        item = FeedbackItem(
            ordinal=1,
            kind=ItemKind.OBSERVATION,
            title=None,
            body=body or raw,
            source_span=(0, byte_at[len(raw)]),
        ) if body else None
        return FeedbackReport(
            course_id=course_id,
            format=fmt,
            items=[item] if item else [],
            raw_text=raw,
        )

    # the preamble ends at the first item or the first structural heading,
    # whichever comes first
    preamble_cut = cp_spans[0][0]
    heading_starts = [
        lines[i].content_start for i in boundaries if lines[i].content_start < preamble_cut
    ]
    if heading_starts:
        preamble_cut = min(heading_starts)
    preamble = raw[:preamble_cut].strip() or None
    closing = raw[cp_spans[-1][1]:].strip() or None
    return FeedbackReport(
        course_id=course_id,
        format=fmt,
        items=items,
        raw_text=raw,
        preamble=preamble,
        closing=closing,
    )


def item_span_text(report: FeedbackReport, item: FeedbackItem) -> str:
    """The exact raw-text slice an item was parsed from."""
    start, end = item.source_span
    return report.raw_text.encode("utf-8")[start:end].decode("utf-8")


def report_to_dict(report: FeedbackReport) -> dict:
    from .quality import assessment_to_dict  # local import avoids a cycle

    return {
        "course_id": report.course_id,
        "format": report.format.value,
        "items": [
            {
                "ordinal": it.ordinal,
                "kind": it.kind.value,
                "title": it.title,
                "body": it.body,
                "source_span": list(it.source_span),
            }
            for it in report.items
        ],
        "raw_text": report.raw_text,
        "preamble": report.preamble,
        "closing": report.closing,
        "quality": assessment_to_dict(report.quality) if report.quality else None,
    }


def report_from_dict(data: dict) -> FeedbackReport:
    from .quality import assessment_from_dict

    return FeedbackReport(
        course_id=data["course_id"],
        format=FormatClass(data["format"]),
        items=[
            FeedbackItem(
                ordinal=it["ordinal"],
                kind=ItemKind(it["kind"]),
                title=it.get("title"),
                body=it["body"],
                source_span=tuple(it["source_span"]),
            )
            for it in data["items"]
        ],
        raw_text=data["raw_text"],
        preamble=data.get("preamble"),
        closing=data.get("closing"),
        quality=assessment_from_dict(data["quality"]) if data.get("quality") else None,
    )


def report_to_json(report: FeedbackReport) -> str:
    return json.dumps(report_to_dict(report), ensure_ascii=False, sort_keys=True, indent=2) + "\n"
