"""Deterministic synthetic corpora for demos, tests, and load checks.

The generated corpus mirrors the shape of a department-scale evaluation
export: 75 courses, 742 responses, course sizes from a single response up to
44, exactly seven single-respondent courses, and a mix of Danish and English
free text with occasional person names.
"""

from __future__ import annotations

import csv
import random
from pathlib import Path

DEMO_COURSES = 75
DEMO_RESPONSES = 742
DEMO_SINGLETON_COURSES = 7
DEMO_MAX_COURSE_SIZE = 44

_EN_SENTENCES = [
    "The lectures were well structured and the slides were clear.",
    "I liked the group work sessions, they helped me understand the material.",
    "The workload felt excessive in the last weeks before the exam.",
    "Online teaching worked well for me this semester.",
    "I did not like online teaching, discussions felt flat.",
    "The exam format matched the exercises we practiced.",
    "Feedback on assignments arrived late and was hard to act on.",
    "More examples during lectures would make the theory easier to follow.",
    "The teaching assistant was super helpful during the lab sessions.",
    "The project description was confusing and the goals kept changing.",
    "Office hours were great for clarifying the difficult proofs.",
    "The slides should be uploaded before the lecture, not after.",
    "Some of the reading material felt hopeless to get through.",
    "Group work assignments were a good way to meet other students.",
    "The pace of the lectures was good, not too fast and not too slow.",
]

_DA_SENTENCES = [
    "Forelæsningerne var gode, og det var nemt at følge med i materialet.",
    "Jeg synes ikke at opgaverne passede til det, der blev undervist i.",
    "Det var en god ide med gruppearbejde, og det fungerede fint online.",
    "Der var for meget pensum, og det var ikke klart hvad der var vigtigt.",
    "Eksamen var fair, og den lignede de opgaver vi havde regnet.",
    "Feedback på afleveringerne kom for sent til at være nyttig.",
    "Underviseren var god til at forklare de svære begreber.",
    "Slides var rodede, og det var svært at finde det vigtige.",
]

_FIRST_NAMES = ["Anna", "Mikkel", "Sofie", "Jonas", "Freja", "Emil", "Ida", "Lucas"]
_LAST_NAMES = ["Hansen", "Jensen", "Nielsen", "Larsen", "Pedersen", "Andersen"]


def demo_corpus_sizes() -> list[int]:
    """75 course sizes summing to 742: seven 1s, one 44, the rest >= 3."""
    rest = DEMO_COURSES - DEMO_SINGLETON_COURSES - 1
    sizes = [3] * rest
    remaining = (
        DEMO_RESPONSES - DEMO_SINGLETON_COURSES - DEMO_MAX_COURSE_SIZE - 3 * rest
    )
    idx = 0
    while remaining > 0:
        if sizes[idx] < DEMO_MAX_COURSE_SIZE - 1:
            sizes[idx] += 1
            remaining -= 1
        idx = (idx + 1) % rest
    all_sizes = [1] * DEMO_SINGLETON_COURSES + [DEMO_MAX_COURSE_SIZE] + sizes
    assert sum(all_sizes) == DEMO_RESPONSES
    return all_sizes


def _response_text(rng: random.Random) -> str:
    pool = _DA_SENTENCES if rng.random() < 0.3 else _EN_SENTENCES
    k = rng.choice([1, 1, 2, 3])
    return " ".join(rng.choice(pool) for _ in range(k))


def demo_corpus_rows(seed: int = 7) -> tuple[list[list[str]], list[list[str]]]:
    """(corpus rows, roster rows) for the department-scale demo corpus."""
    rng = random.Random(seed)
    sizes = demo_corpus_sizes()
    corpus_rows: list[list[str]] = []
    roster_rows: list[list[str]] = []
    response_num = 0
    for course_num, size in enumerate(sizes, start=1):
        course_id = f"course-{course_num:02d}"
        names = [
            f"{rng.choice(_FIRST_NAMES)} {rng.choice(_LAST_NAMES)}"
            for _ in range(max(1, size // 6))
        ]
        for name in dict.fromkeys(names):
            roster_rows.append([course_id, name])
        for _ in range(size):
            response_num += 1
            text = _response_text(rng)
            if rng.random() < 0.08:
                text = f"{rng.choice(names)} explained everything well. {text}"
            respondent = rng.choice(names) if rng.random() < 0.1 else ""
            corpus_rows.append([course_id, f"r{response_num:04d}", text, respondent])
    return corpus_rows, roster_rows


def write_demo_corpus(
    corpus_path: str | Path,
    roster_path: str | Path | None = None,
    seed: int = 7,
) -> tuple[Path, Path | None]:
    """Write the department-scale demo corpus (and roster) as CSV files."""
    corpus_rows, roster_rows = demo_corpus_rows(seed)
    corpus_path = Path(corpus_path)
    corpus_path.parent.mkdir(parents=True, exist_ok=True)
    with corpus_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["course_id", "response_id", "text", "respondent_name"])
        writer.writerows(corpus_rows)
    if roster_path is None:
        return corpus_path, None
    roster_path = Path(roster_path)
    roster_path.parent.mkdir(parents=True, exist_ok=True)
    with roster_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["course_id", "person_name"])
        writer.writerows(roster_rows)
    return corpus_path, roster_path
