from pathlib import Path

import pytest

from evalsynth.corpus import CourseBundle, EvaluationResponse
from evalsynth.synthetic import write_demo_corpus

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def excerpt_enumerated() -> str:
    return (DATA_DIR / "excerpt_enumerated.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def excerpt_summary_actions() -> str:
    return (DATA_DIR / "excerpt_summary_actions.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def demo_corpus(tmp_path_factory) -> tuple[Path, Path]:
    """Paths of the department-scale demo corpus and its roster."""
    root = tmp_path_factory.mktemp("demo_corpus")
    corpus, roster = write_demo_corpus(root / "corpus.csv", root / "roster.csv")
    return corpus, roster


def make_bundle(course_id: str, *texts: str, roster: set[str] | None = None) -> CourseBundle:
    responses = [
        EvaluationResponse(f"{course_id}-r{i}", course_id, text)
        for i, text in enumerate(texts, start=1)
    ]
    return CourseBundle(course_id=course_id, responses=responses, roster=roster or set())
