"""Token estimation and the summary-budget heuristic.

Token counts are estimated deterministically as ceil(characters / 4) so the
pipeline stays backend-agnostic.  The stage-1 summary budget X is
``clamp(floor(0.25 * input_estimate), 128, 512)``; when the concatenated
input would not fit the model context, whole responses are dropped from the
tail until it does.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .corpus import CourseBundle
from .errors import InputTooLarge

SEPARATOR = "\n---\n"
MIN_SUMMARY_TOKENS = 128
MAX_SUMMARY_TOKENS = 512
SUMMARY_FRACTION = 0.25


@dataclass(frozen=True)
class ModelLimits:
    """Context capacity the budget must respect."""

    context_tokens: int = 4096
    prompt_overhead_tokens: int = 64

    def __post_init__(self) -> None:
        if self.context_tokens <= 0:
            raise ValueError("context_tokens must be positive")
        if self.prompt_overhead_tokens < 0:
            raise ValueError("prompt_overhead_tokens must be >= 0")
        if self.context_tokens <= self.prompt_overhead_tokens:
            raise ValueError("context_tokens must exceed prompt_overhead_tokens")


@dataclass(frozen=True)
class TokenBudget:
    summary_budget_x: int
    input_token_estimate: int
    dropped_response_count: int = 0


def estimate_tokens(text: str) -> int:
    """ceil(len/4); 0 only for empty text.  Monotone under appends."""
    return math.ceil(len(text) / 4)


def _clamped_budget(input_estimate: int) -> int:
    x = math.floor(SUMMARY_FRACTION * input_estimate)
    return max(MIN_SUMMARY_TOKENS, min(MAX_SUMMARY_TOKENS, x))


def compute_summary_budget(bundle: CourseBundle, limits: ModelLimits) -> TokenBudget:
    """Pick the summary budget X for a bundle, dropping tail responses to fit.

    Responses are dropped whole, from the tail only, until the concatenated
    input plus prompt overhead leaves room for at least the minimum summary
    budget.  X is then the clamped fraction of the kept input, further capped
    by the remaining headroom so that
    ``input_estimate + overhead + X <= context_tokens`` always holds.

    Raises:
        InputTooLarge: even a single response cannot fit alongside the
            minimum summary budget.
    """
    if not bundle.responses:
        raise ValueError("bundle has no responses")

    available = limits.context_tokens - limits.prompt_overhead_tokens - MIN_SUMMARY_TOKENS

    # Character count of the joined first-k prefix, without building strings.
    prefix_chars = list(itertools.accumulate(len(r.text) for r in bundle.responses))

    def joined_estimate(keep: int) -> int:
        return math.ceil((prefix_chars[keep - 1] + len(SEPARATOR) * (keep - 1)) / 4)

    keep = len(bundle.responses)
    while keep > 0 and joined_estimate(keep) > available:
        keep -= 1
    if keep == 0:
        raise InputTooLarge(
            f"course {bundle.course_id}: a single response exceeds "
            f"{available} tokens of usable context"
        )

    estimate = joined_estimate(keep)
    headroom = limits.context_tokens - limits.prompt_overhead_tokens - estimate
    x = min(_clamped_budget(estimate), headroom)
    return TokenBudget(
        summary_budget_x=x,
        input_token_estimate=estimate,
        dropped_response_count=len(bundle.responses) - keep,
    )


def concatenate_responses(bundle: CourseBundle, budget: TokenBudget) -> str:
    """Join the kept responses in bundle order with the separator."""
    keep = len(bundle.responses) - budget.dropped_response_count
    if keep < 1:
        raise ValueError("budget drops every response in the bundle")
    return SEPARATOR.join(r.text for r in bundle.responses[:keep])
