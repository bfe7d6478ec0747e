"""Two-stage per-course generation: summarise, then ask for actionable advice.

Stage 1 concatenates a course's responses under its token budget and asks
the backend for a summary capped at the budget X.  Stage 2 feeds only that
summary back in and requests actionable feedback; it never sees the raw
responses, which keeps the stages separable and lets stage-2 additions be
diffed against stage-1 content.  Courses are independent: one failure is
recorded in the run manifest without aborting the rest.
"""

from __future__ import annotations

import hashlib
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

from .backends import Backend, GenerationRequest
from .budget import ModelLimits, TokenBudget, compute_summary_budget, concatenate_responses, estimate_tokens
from .corpus import CourseBundle
from .errors import (
    CourseFailed,
    EmptyFeedback,
    EmptySummary,
    ExtraBinding,
    MissingBinding,
    PromptTooLarge,
)
from .lexicons import Lexicons
from .quality import QualityConfig, assess
from .structure import FeedbackReport, parse_report

STAGE2_SAFETY_MARGIN = 16

SUMMARISE_TEMPLATE = (
    "Summarise, to a maximum of {X} tokens this text that is based on "
    "course evaluations: {INPUT}"
)
ACTIONABLE_TEMPLATE = (
    "You are now an actionable feedback bot. Give actionable feedback, "
    "based upon these summarised course evaluations, to the instructor of "
    "the course. Leave out names that could identify entities. Make sure "
    "that the feedback is factual, actionable, and appropriate to the "
    "instructor: {SUMMARISATION}"
)

_PLACEHOLDER = re.compile(r"\{(X|INPUT|SUMMARISATION)\}")


class PromptStage(str, Enum):
    SUMMARISE = "SUMMARISE"
    ACTIONABLE = "ACTIONABLE"


@dataclass(frozen=True)
class PromptTemplate:
    stage: PromptStage
    template: str


DEFAULT_TEMPLATES = {
    PromptStage.SUMMARISE: PromptTemplate(PromptStage.SUMMARISE, SUMMARISE_TEMPLATE),
    PromptStage.ACTIONABLE: PromptTemplate(PromptStage.ACTIONABLE, ACTIONABLE_TEMPLATE),
}


@dataclass
class SummaryDraft:
    course_id: str
    text: str
    input_digest: str
    budget: TokenBudget
    backend_id: str


class CourseOutcome(str, Enum):
    OK = "OK"
    SKIPPED = "SKIPPED"
    ERROR = "ERROR"


@dataclass
class RunManifest:
    run_id: str
    config: dict = field(default_factory=dict)
    outcomes: dict[str, dict] = field(default_factory=dict)

    def record(self, course_id: str, outcome: CourseOutcome, message: str = "") -> None:
        self.outcomes[course_id] = {"status": outcome.value, "message": message}


@dataclass
class PipelineOptions:
    limits: ModelLimits = field(default_factory=ModelLimits)
    quality: QualityConfig = field(default_factory=QualityConfig)
    lexicons: Lexicons | None = None
    run_id: str = "run"
    max_workers: int = 4
    courses: set[str] | None = None  # restrict to these course ids; others SKIPPED
    templates: dict[PromptStage, PromptTemplate] = field(
        default_factory=lambda: dict(DEFAULT_TEMPLATES)
    )


def render_prompt(template: PromptTemplate, bindings: dict[str, str]) -> str:
    """Single-pass exact substitution of {X}/{INPUT}/{SUMMARISATION}.

    Every placeholder in the template must be bound and no extra bindings
    are accepted; binding values are never re-scanned for placeholders.
    """
    placeholders = set(_PLACEHOLDER.findall(template.template))
    for name in placeholders:
        if name not in bindings:
            raise MissingBinding(name)
    for name in bindings:
        if name not in placeholders:
            raise ExtraBinding(name)
    return _PLACEHOLDER.sub(lambda m: bindings[m.group(1)], template.template)


def _call_backend(backend: Backend, request: GenerationRequest, course_id: str):
    try:
        return backend.generate(request)
    except Exception as exc:
        raise CourseFailed(course_id, exc) from exc


def summarise_course(
    bundle: CourseBundle,
    limits: ModelLimits,
    backend: Backend,
    template: PromptTemplate | None = None,
) -> SummaryDraft:
    """Stage 1: budget, concatenate, and summarise one course."""
    template = template or DEFAULT_TEMPLATES[PromptStage.SUMMARISE]
    budget = compute_summary_budget(bundle, limits)
    joined = concatenate_responses(bundle, budget)
    prompt = render_prompt(
        template, {"X": str(budget.summary_budget_x), "INPUT": joined}
    )
    completion = _call_backend(
        backend,
        GenerationRequest(prompt=prompt, max_output_tokens=budget.summary_budget_x),
        bundle.course_id,
    )
    if not completion.text.strip():
        raise EmptySummary(f"course {bundle.course_id}: backend returned no summary")
    return SummaryDraft(
        course_id=bundle.course_id,
        text=completion.text,
        input_digest=hashlib.sha256(joined.encode("utf-8")).hexdigest(),
        budget=budget,
        backend_id=completion.backend_id,
    )


def generate_feedback(
    draft: SummaryDraft,
    limits: ModelLimits,
    backend: Backend,
    template: PromptTemplate | None = None,
) -> str:
    """Stage 2: turn the summary draft into actionable feedback text."""
    template = template or DEFAULT_TEMPLATES[PromptStage.ACTIONABLE]
    prompt = render_prompt(template, {"SUMMARISATION": draft.text})
    max_output = limits.context_tokens - estimate_tokens(prompt) - STAGE2_SAFETY_MARGIN
    if max_output < 1:
        raise PromptTooLarge(
            f"course {draft.course_id}: summary leaves no room for feedback output"
        )
    completion = _call_backend(
        backend,
        GenerationRequest(prompt=prompt, max_output_tokens=max_output),
        draft.course_id,
    )
    if not completion.text.strip():
        raise EmptyFeedback(f"course {draft.course_id}: backend returned no feedback")
    return completion.text


def _process_course(
    bundle: CourseBundle, backend: Backend, options: PipelineOptions
) -> tuple[FeedbackReport, SummaryDraft]:
    draft = summarise_course(
        bundle, options.limits, backend, options.templates[PromptStage.SUMMARISE]
    )
    raw = generate_feedback(
        draft, options.limits, backend, options.templates[PromptStage.ACTIONABLE]
    )
    report = parse_report(raw, bundle.course_id)
    report = assess(report, bundle, config=options.quality, lexicons=options.lexicons)
    return report, draft


def run_pipeline(
    bundles: list[CourseBundle],
    backend: Backend,
    options: PipelineOptions | None = None,
) -> tuple[list[FeedbackReport], dict[str, SummaryDraft], RunManifest]:
    """Run the two-stage pipeline over every bundle.

    Returns the assessed reports (stable bundle order, errored and skipped
    courses omitted), the per-course summary drafts, and a manifest with one
    outcome per input course.  With a deterministic backend the outputs are
    byte-reproducible.
    """
    options = options or PipelineOptions()
    manifest = RunManifest(run_id=options.run_id)

    selected = [
        b for b in bundles if options.courses is None or b.course_id in options.courses
    ]
    selected_ids = {b.course_id for b in selected}
    for bundle in bundles:
        if bundle.course_id not in selected_ids:
            manifest.record(bundle.course_id, CourseOutcome.SKIPPED, "not selected")

    def worker(bundle: CourseBundle):
        try:
            return _process_course(bundle, backend, options), None
        except Exception as exc:  # per-course isolation
            return None, exc

    workers = max(1, min(options.max_workers, backend.max_in_flight, len(selected) or 1))
    if selected:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(worker, selected))
    else:
        results = []

    reports: list[FeedbackReport] = []
    drafts: dict[str, SummaryDraft] = {}
    for bundle, (result, error) in zip(selected, results):
        if error is not None:
            manifest.record(bundle.course_id, CourseOutcome.ERROR, str(error))
            continue
        report, draft = result
        message = ""
        if draft.budget.dropped_response_count:
            message = (
                f"dropped {draft.budget.dropped_response_count} trailing "
                f"response(s) to fit the context window"
            )
        manifest.record(bundle.course_id, CourseOutcome.OK, message)
        reports.append(report)
        drafts[bundle.course_id] = draft
    return reports, drafts, manifest
