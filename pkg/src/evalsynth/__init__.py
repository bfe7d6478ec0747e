"""evalsynth: actionable lecturer feedback from free-text course evaluations.

The library ingests per-course student evaluation text, runs a two-stage
summarise-then-advise generation pipeline against a pluggable text backend,
parses the output into structured feedback items, applies deterministic
quality gates (redaction, factuality coverage, actionability, density,
contradiction and sentiment checks), and supports a human Likert-rating
workflow with agreement statistics and a divergence queue.
"""

__version__ = "0.1.0"
