"""Lexicon files backing the quality gates.

Every vocabulary ships as a data file (UTF-8, one phrase per line, ``#``
comments) rather than code, so institutions can tune wording without
touching the package.  Phrases are lowercased at load time.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path

_DATA_FILES = {
    "stopwords": "stopwords_bilingual.txt",
    "action_verbs": "action_verbs.txt",
    "out_of_control": "out_of_control.txt",
    "aspects": "aspects.txt",
    "positive_cues": "polarity_positive.txt",
    "negative_cues": "polarity_negative.txt",
    "hedges": "hedges.txt",
    "strong_positive": "strong_positive.txt",
    "strong_negative": "strong_negative.txt",
    "intensifiers": "intensifiers.txt",
}


@dataclass(frozen=True)
class Lexicons:
    stopwords: frozenset[str]
    action_verbs: tuple[str, ...]
    out_of_control: tuple[str, ...]
    aspects: tuple[str, ...]
    positive_cues: tuple[str, ...]
    negative_cues: tuple[str, ...]
    hedges: tuple[str, ...]
    strong_positive: tuple[str, ...]
    strong_negative: tuple[str, ...]
    intensifiers: tuple[str, ...]


def parse_phrases(text: str) -> tuple[str, ...]:
    phrases = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            phrases.append(line)
    return tuple(dict.fromkeys(phrases))


def load_phrase_file(path: str | Path) -> tuple[str, ...]:
    return parse_phrases(Path(path).read_text(encoding="utf-8"))


@lru_cache(maxsize=1)
def default_lexicons() -> Lexicons:
    values: dict[str, tuple[str, ...]] = {}
    for name, filename in _DATA_FILES.items():
        text = resources.files("evalsynth.data").joinpath(filename).read_text("utf-8")
        values[name] = parse_phrases(text)
    return Lexicons(
        stopwords=frozenset(values.pop("stopwords")),
        **values,
    )


def load_lexicons(overrides: dict[str, str | Path] | None = None) -> Lexicons:
    """Default lexicons, with named vocabularies replaced by custom files."""
    lex = default_lexicons()
    if not overrides:
        return lex
    changes: dict[str, object] = {}
    for name, path in overrides.items():
        if name not in _DATA_FILES:
            raise KeyError(f"unknown lexicon {name!r}; expected one of {sorted(_DATA_FILES)}")
        phrases = load_phrase_file(path)
        changes[name] = frozenset(phrases) if name == "stopwords" else phrases
    return replace(lex, **changes)
