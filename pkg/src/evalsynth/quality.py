"""Deterministic quality gates over generated feedback reports.

Each gate is a pure function of the report, the source bundle, and a fixed
lexicon, so every flag is desk-verifiable: name redaction, lexical
factuality coverage, actionability scoring, input-density warnings,
contradiction-collapse detection, and strong-sentiment retention.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .corpus import CourseBundle
from .lexicons import Lexicons, default_lexicons
from .structure import FeedbackItem, FeedbackReport, ItemKind, parse_report

REDACTION_MARK = "[PERSON]"
DEFAULT_SUPPORT_THRESHOLD = 0.2
DEFAULT_SPARSE_MAX = 2
DEFAULT_DENSE_MIN = 30
CONTRADICTION_WINDOW = 10  # tokens

_WORD = re.compile(r"[^\W\d_]+", re.UNICODE)


class FlagKind(str, Enum):
    NAME_LEAK = "NAME_LEAK"
    SENTIMENT_DILUTION = "SENTIMENT_DILUTION"
    SPARSE_INPUT = "SPARSE_INPUT"
    DENSE_INPUT = "DENSE_INPUT"
    CONTRADICTION_COLLAPSE = "CONTRADICTION_COLLAPSE"
    UNSUPPORTED_ITEM = "UNSUPPORTED_ITEM"
    OUT_OF_CONTROL_SUGGESTION = "OUT_OF_CONTROL_SUGGESTION"


@dataclass(frozen=True)
class QualityFlag:
    kind: FlagKind
    detail: str
    item_ordinal: int | None = None


@dataclass(frozen=True)
class ItemSupport:
    ordinal: int
    support: float
    best_response_id: str | None


@dataclass
class QualityAssessment:
    factuality_score: float
    unsupported_item_ordinals: list[int]
    actionability_score: float
    flags: list[QualityFlag]
    per_item_support: list[ItemSupport]


@dataclass
class RedactionResult:
    text: str
    leak_count: int
    redacted_spans: list[tuple[int, int, str]]  # offsets into the result text


@dataclass(frozen=True)
class QualityConfig:
    support_threshold: float = DEFAULT_SUPPORT_THRESHOLD
    sparse_max: int = DEFAULT_SPARSE_MAX
    dense_min: int = DEFAULT_DENSE_MIN


# -- tokens and phrase matching --------------------------------------------

def tokenize(text: str) -> list[str]:
    return _WORD.findall(text.lower())


def content_words(text: str, stopwords: frozenset[str]) -> set[str]:
    return {t for t in tokenize(text) if len(t) >= 3 and t not in stopwords}


def phrase_starts(tokens: list[str], phrase: str) -> list[int]:
    """Start indices where the phrase's token sequence occurs."""
    want = tokenize(phrase)
    if not want:
        return []
    n, m = len(tokens), len(want)
    return [i for i in range(n - m + 1) if tokens[i:i + m] == want]


def contains_phrase(text: str, phrase: str) -> bool:
    return bool(phrase_starts(tokenize(text), phrase))


def jaccard(a: set[str], b: set[str]) -> float:
    """Set overlap; two empty sets count as identical (1.0)."""
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)


def _item_text(item: FeedbackItem) -> str:
    return f"{item.title} {item.body}" if item.title else item.body


# -- redaction --------------------------------------------------------------

def _roster_regex(roster: set[str]) -> re.Pattern | None:
    alternatives: set[str] = set()
    for name in roster:
        name = name.strip()
        if not name:
            continue
        tokens = name.split()
        alternatives.add(r"\s+".join(re.escape(t) for t in tokens))
        for token in tokens:
            if len(token) >= 3:
                alternatives.add(re.escape(token))
    if not alternatives:
        return None
    ordered = sorted(alternatives, key=len, reverse=True)
    return re.compile(r"(?<!\w)(?:" + "|".join(ordered) + r")(?!\w)", re.IGNORECASE)


def scrub_names(text: str, roster: set[str]) -> RedactionResult:
    """Replace whole-word roster-name occurrences with the redaction mark.

    Both full names and individual name tokens of length >= 3 are matched,
    case-insensitively, longest alternative first.  Existing redaction marks
    are protected, which keeps the operation idempotent even when a roster
    name collides with the marker word itself.
    """
    rx = _roster_regex(roster)
    if rx is None:
        return RedactionResult(text=text, leak_count=0, redacted_spans=[])

    out: list[str] = []
    spans: list[tuple[int, int, str]] = []
    pos = 0
    leaks = 0

    def emit(chunk: str) -> None:
        nonlocal pos
        out.append(chunk)
        pos += len(chunk)

    for i, segment in enumerate(text.split(REDACTION_MARK)):
        if i:
            emit(REDACTION_MARK)
        last = 0
        for m in rx.finditer(segment):
            emit(segment[last:m.start()])
            spans.append((pos, pos + len(REDACTION_MARK), REDACTION_MARK))
            emit(REDACTION_MARK)
            leaks += 1
            last = m.end()
        emit(segment[last:])
    return RedactionResult(text="".join(out), leak_count=leaks, redacted_spans=spans)


# -- factuality ---------------------------------------------------------------

def factuality_coverage(
    report: FeedbackReport,
    bundle: CourseBundle,
    stopwords: frozenset[str] | None = None,
    threshold: float = DEFAULT_SUPPORT_THRESHOLD,
) -> tuple[list[ItemSupport], float, list[QualityFlag]]:
    """Support each item by its best lexical match among the responses.

    Support is the maximum Jaccard overlap between the item's content words
    (title + body, lowercased, stopwords dropped, tokens of length >= 3) and
    each response's content words.  Items below the threshold are flagged.
    """
    stopwords = default_lexicons().stopwords if stopwords is None else stopwords
    response_words = [
        (r.response_id, content_words(r.text, stopwords)) for r in bundle.responses
    ]
    per_item: list[ItemSupport] = []
    flags: list[QualityFlag] = []
    supported = 0
    for item in report.items:
        item_words = content_words(_item_text(item), stopwords)
        best, best_id = -1.0, None
        for response_id, words in response_words:
            score = jaccard(item_words, words)
            if score > best:
                best, best_id = score, response_id
        per_item.append(ItemSupport(item.ordinal, best, best_id))
        if best < threshold:
            flags.append(
                QualityFlag(
                    FlagKind.UNSUPPORTED_ITEM,
                    f"best support {best:.4f} below threshold {threshold}",
                    item.ordinal,
                )
            )
        else:
            supported += 1
    score = supported / len(report.items) if report.items else 1.0
    return per_item, score, flags


# -- actionability ------------------------------------------------------------

def actionability_score(
    report: FeedbackReport, lexicons: Lexicons | None = None
) -> tuple[float, list[QualityFlag]]:
    """Fraction of ACTION items carrying an action verb; 0.0 with no actions.

    ACTION items containing an out-of-control phrase (grading schemes,
    course duration, ...) are flagged since the instructor cannot act on
    them.
    """
    lex = lexicons or default_lexicons()
    action_items = [it for it in report.items if it.kind is ItemKind.ACTION]
    flags: list[QualityFlag] = []
    matched = 0
    for item in action_items:
        text = _item_text(item)
        if any(contains_phrase(text, verb) for verb in lex.action_verbs):
            matched += 1
        for phrase in lex.out_of_control:
            if contains_phrase(text, phrase):
                flags.append(
                    QualityFlag(
                        FlagKind.OUT_OF_CONTROL_SUGGESTION,
                        f"suggestion mentions {phrase!r}",
                        item.ordinal,
                    )
                )
                break
    score = matched / len(action_items) if action_items else 0.0
    return score, flags


# -- input density -------------------------------------------------------------

def input_density_flags(
    bundle: CourseBundle,
    sparse_max: int = DEFAULT_SPARSE_MAX,
    dense_min: int = DEFAULT_DENSE_MIN,
) -> list[QualityFlag]:
    if sparse_max >= dense_min:
        raise ValueError("sparse_max must be below dense_min")
    count = len(bundle.responses)
    if count <= sparse_max:
        return [
            QualityFlag(
                FlagKind.SPARSE_INPUT,
                f"only {count} response(s); specifics may be invented",
            )
        ]
    if count >= dense_min:
        return [
            QualityFlag(
                FlagKind.DENSE_INPUT,
                f"{count} responses; prioritisation may be unreliable",
            )
        ]
    return []


# -- contradiction collapse -----------------------------------------------------

def _cooccurs(tokens: list[str], aspect: str, cues: tuple[str, ...]) -> bool:
    aspect_starts = phrase_starts(tokens, aspect)
    if not aspect_starts:
        return False
    for cue in cues:
        for cue_start in phrase_starts(tokens, cue):
            if any(abs(cue_start - a) <= CONTRADICTION_WINDOW for a in aspect_starts):
                return True
    return False


def contradiction_check(
    bundle: CourseBundle,
    report: FeedbackReport,
    lexicons: Lexicons | None = None,
) -> list[QualityFlag]:
    """Flag aspects with genuinely mixed student opinion reported one-sidedly.

    An aspect qualifies when it appears in at least two responses and has
    both a positive and a negative cue within a 10-token window of it in
    some response.  The report collapses it when the items mentioning the
    aspect carry exactly one polarity and no hedge cue.
    """
    lex = lexicons or default_lexicons()
    response_tokens = [tokenize(r.text) for r in bundle.responses]
    flags: list[QualityFlag] = []
    for aspect in lex.aspects:
        mention_count = sum(1 for toks in response_tokens if phrase_starts(toks, aspect))
        if mention_count < 2:
            continue
        has_positive = any(
            _cooccurs(toks, aspect, lex.positive_cues) for toks in response_tokens
        )
        has_negative = any(
            _cooccurs(toks, aspect, lex.negative_cues) for toks in response_tokens
        )
        if not (has_positive and has_negative):
            continue

        mention_items = [
            it for it in report.items if contains_phrase(_item_text(it), aspect)
        ]
        if not mention_items:
            continue
        polarities: set[str] = set()
        hedged = False
        for item in mention_items:
            text = _item_text(item)
            if any(contains_phrase(text, c) for c in lex.positive_cues):
                polarities.add("positive")
            if any(contains_phrase(text, c) for c in lex.negative_cues):
                polarities.add("negative")
            if any(contains_phrase(text, h) for h in lex.hedges):
                hedged = True
        if len(polarities) == 1 and not hedged:
            flags.append(
                QualityFlag(
                    FlagKind.CONTRADICTION_COLLAPSE,
                    f"mixed opinions on {aspect!r} reported as "
                    f"{polarities.pop()} only",
                )
            )
    return flags


# -- sentiment retention ----------------------------------------------------------

def _has_strong_cue(
    text: str,
    strong_phrases: tuple[str, ...],
    polarity_words: tuple[str, ...],
    intensifiers: tuple[str, ...],
) -> bool:
    if any(contains_phrase(text, p) for p in strong_phrases):
        return True
    tokens = tokenize(text)
    for intensifier in intensifiers:
        for pos in phrase_starts(tokens, intensifier):
            following = pos + len(tokenize(intensifier))
            if any(following in phrase_starts(tokens, w) for w in polarity_words):
                return True
    return False


def sentiment_retention(
    bundle: CourseBundle,
    report: FeedbackReport,
    lexicons: Lexicons | None = None,
) -> list[QualityFlag]:
    """Flag strong student sentiment the report failed to carry over.

    A strong phrase in the inputs is retained when the report contains any
    same-polarity strong phrase or an intensifier directly before a
    same-polarity cue word ("extremely helpful").
    """
    lex = lexicons or default_lexicons()
    input_text = "\n".join(r.text for r in bundle.responses)
    flags: list[QualityFlag] = []
    for strong_phrases, polarity_words, label in (
        (lex.strong_positive, lex.positive_cues, "positive"),
        (lex.strong_negative, lex.negative_cues, "negative"),
    ):
        lost = [p for p in strong_phrases if contains_phrase(input_text, p)]
        if not lost:
            continue
        if _has_strong_cue(report.raw_text, strong_phrases, polarity_words, lex.intensifiers):
            continue
        for phrase in lost:
            flags.append(
                QualityFlag(
                    FlagKind.SENTIMENT_DILUTION,
                    f"strong {label} phrase {phrase!r} not conveyed",
                )
            )
    return flags


# -- composition -------------------------------------------------------------------

def assess(
    report: FeedbackReport,
    bundle: CourseBundle,
    roster: set[str] | None = None,
    config: QualityConfig | None = None,
    lexicons: Lexicons | None = None,
) -> FeedbackReport:
    """Redact, run every gate, and return the report with its assessment.

    Redaction happens first: when the raw text leaks a roster name the
    scrubbed text replaces it and the report is re-parsed so item bodies and
    spans stay consistent.  All other checks then run on the scrubbed
    report.
    """
    cfg = config or QualityConfig()
    lex = lexicons or default_lexicons()
    names = bundle.roster if roster is None else roster

    flags: list[QualityFlag] = []
    redaction = scrub_names(report.raw_text, names)
    if redaction.leak_count:
        report = parse_report(redaction.text, report.course_id)
        for start, end, _ in redaction.redacted_spans:
            flags.append(
                QualityFlag(
                    FlagKind.NAME_LEAK,
                    f"roster name redacted at chars {start}-{end}",
                )
            )

    per_item, factuality, unsupported_flags = factuality_coverage(
        report, bundle, lex.stopwords, cfg.support_threshold
    )
    flags.extend(unsupported_flags)
    actionability, action_flags = actionability_score(report, lex)
    flags.extend(action_flags)
    flags.extend(input_density_flags(bundle, cfg.sparse_max, cfg.dense_min))
    flags.extend(contradiction_check(bundle, report, lex))
    flags.extend(sentiment_retention(bundle, report, lex))

    report.quality = QualityAssessment(
        factuality_score=factuality,
        unsupported_item_ordinals=[
            f.item_ordinal for f in unsupported_flags if f.item_ordinal is not None
        ],
        actionability_score=actionability,
        flags=flags,
        per_item_support=per_item,
    )
    return report


# -- serialization --------------------------------------------------------------------

def assessment_to_dict(qa: QualityAssessment) -> dict:
    return {
        "factuality_score": qa.factuality_score,
        "unsupported_item_ordinals": qa.unsupported_item_ordinals,
        "actionability_score": qa.actionability_score,
        "flags": [
            {"kind": f.kind.value, "detail": f.detail, "item_ordinal": f.item_ordinal}
            for f in qa.flags
        ],
        "per_item_support": [
            {
                "ordinal": s.ordinal,
                "support": s.support,
                "best_response_id": s.best_response_id,
            }
            for s in qa.per_item_support
        ],
    }


def assessment_from_dict(data: dict) -> QualityAssessment:
    return QualityAssessment(
        factuality_score=data["factuality_score"],
        unsupported_item_ordinals=list(data["unsupported_item_ordinals"]),
        actionability_score=data["actionability_score"],
        flags=[
            QualityFlag(FlagKind(f["kind"]), f["detail"], f.get("item_ordinal"))
            for f in data["flags"]
        ],
        per_item_support=[
            ItemSupport(s["ordinal"], s["support"], s.get("best_response_id"))
            for s in data["per_item_support"]
        ],
    )
