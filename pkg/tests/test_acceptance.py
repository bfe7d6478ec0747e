"""Acceptance suite: one test per release criterion, each with its time box.

Run with ``pytest tests/test_acceptance.py -v`` for the per-criterion
pass/fail lines (``-s`` also shows the timing prints).
"""

import json
import random
import re
import time
from collections import Counter
from contextlib import contextmanager
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from conftest import make_bundle
from evalsynth.backends import MockBackend, prompt_digest, load_mock_script
from evalsynth.budget import (
    SEPARATOR,
    ModelLimits,
    compute_summary_budget,
    concatenate_responses,
    estimate_tokens,
)
from evalsynth.cli import run_command
from evalsynth.config import Config
from evalsynth.errors import InputTooLarge
from evalsynth.lexicons import default_lexicons
from evalsynth.pipeline import (
    ACTIONABLE_TEMPLATE,
    DEFAULT_TEMPLATES,
    SUMMARISE_TEMPLATE,
    PipelineOptions,
    PromptStage,
    render_prompt,
    run_pipeline,
)
from evalsynth.quality import (
    FlagKind,
    contradiction_check,
    factuality_coverage,
    scrub_names,
    sentiment_retention,
)
from evalsynth.ratings import Dimension, LikertRating, RatingStore, divergence_queue, ordinal_alpha
from evalsynth.runs import RunPaths
from evalsynth.service import create_app
from evalsynth.structure import FormatClass, ItemKind, classify_format, parse_report


@contextmanager
def time_box(criterion: str, limit_seconds: float):
    started = time.perf_counter()
    yield
    elapsed = time.perf_counter() - started
    assert elapsed < limit_seconds, f"{criterion} took {elapsed:.2f}s (limit {limit_seconds}s)"
    print(f"ACCEPTANCE PASS: {criterion} ({elapsed:.2f}s < {limit_seconds}s)")


# -- criterion: prompt fidelity ----------------------------------------------

def test_criterion_prompt_fidelity():
    with time_box("prompt fidelity", 1.0):
        assert SUMMARISE_TEMPLATE == (
            "Summarise, to a maximum of {X} tokens this text that is based "
            "on course evaluations: {INPUT}"
        )
        assert ACTIONABLE_TEMPLATE == (
            "You are now an actionable feedback bot. Give actionable "
            "feedback, based upon these summarised course evaluations, to "
            "the instructor of the course. Leave out names that could "
            "identify entities. Make sure that the feedback is factual, "
            "actionable, and appropriate to the instructor: {SUMMARISATION}"
        )
        rendered_1 = render_prompt(
            DEFAULT_TEMPLATES[PromptStage.SUMMARISE],
            {"X": "300", "INPUT": "student feedback text"},
        )
        assert rendered_1 == (
            "Summarise, to a maximum of 300 tokens this text that is based "
            "on course evaluations: student feedback text"
        )
        rendered_2 = render_prompt(
            DEFAULT_TEMPLATES[PromptStage.ACTIONABLE], {"SUMMARISATION": "the summary"}
        )
        assert rendered_2 == ACTIONABLE_TEMPLATE.replace("{SUMMARISATION}", "the summary")


# -- criterion: department-scale run ------------------------------------------------

def _tree_bytes(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file() and p.suffix in (".json", ".txt", ".csv")
    }


def test_criterion_department_scale_run(tmp_path, demo_corpus):
    corpus_path, roster_path = demo_corpus
    with time_box("department-scale run", 60.0):
        out = tmp_path / "runs"
        for run_id in ("pass1", "pass2"):
            code = run_command(
                ["run", "--corpus", str(corpus_path), "--roster", str(roster_path),
                 "--backend", "echo", "--out", str(out), "--run-id", run_id]
            )
            assert code == 0

        paths = RunPaths(out, "pass1")
        reports = sorted(paths.reports_dir.glob("*.json"))
        assert len(reports) == 75  # one per unique course

        sparse = dense = 0
        for path in reports:
            report = json.loads(path.read_text(encoding="utf-8"))
            kinds = [f["kind"] for f in report["quality"]["flags"]]
            sparse += kinds.count("SPARSE_INPUT")
            dense += kinds.count("DENSE_INPUT")
        assert sparse == 7
        assert dense >= 1

        first = _tree_bytes(RunPaths(out, "pass1").root)
        second = _tree_bytes(RunPaths(out, "pass2").root)
        first.pop("manifest.json")
        second.pop("manifest.json")  # differs only in its run_id field
        assert first == second

        manifest_1 = json.loads(RunPaths(out, "pass1").manifest_path.read_text())
        manifest_2 = json.loads(RunPaths(out, "pass2").manifest_path.read_text())
        assert manifest_1["outcomes"] == manifest_2["outcomes"]


# -- criterion: scripted fixture replay ----------------------------------------------------

def test_criterion_scripted_fixture_replay(tmp_path, excerpt_enumerated, excerpt_summary_actions):
    with time_box("scripted fixture replay", 1.0):
        bundle_a = make_bundle("course-a", "feedback about workload and exams.")
        bundle_b = make_bundle("course-b", "feedback about communication and slides.")
        limits = ModelLimits()

        entries = {}
        for bundle, summary, excerpt in (
            (bundle_a, "summary for course a", excerpt_enumerated),
            (bundle_b, "summary for course b", excerpt_summary_actions),
        ):
            budget = compute_summary_budget(bundle, limits)
            prompt_1 = render_prompt(
                DEFAULT_TEMPLATES[PromptStage.SUMMARISE],
                {
                    "X": str(budget.summary_budget_x),
                    "INPUT": concatenate_responses(bundle, budget),
                },
            )
            prompt_2 = render_prompt(
                DEFAULT_TEMPLATES[PromptStage.ACTIONABLE], {"SUMMARISATION": summary}
            )
            entries[prompt_digest(prompt_1)] = summary
            entries[prompt_digest(prompt_2)] = excerpt

        script_path = tmp_path / "replay.tsv"
        script_path.write_text(
            "".join(
                f"{digest}\t{text.replace(chr(10), chr(92) + 'n')}\n"
                for digest, text in entries.items()
            ),
            encoding="utf-8",
        )
        backend = MockBackend(load_mock_script(script_path, strict=True), limits)

        reports, _, manifest = run_pipeline(
            [bundle_a, bundle_b], backend, PipelineOptions(limits=limits)
        )
        assert all(o["status"] == "OK" for o in manifest.outcomes.values())
        by_course = {r.course_id: r for r in reports}

        enum_report = by_course["course-a"]
        assert enum_report.raw_text == excerpt_enumerated  # replayed verbatim
        assert enum_report.format is FormatClass.ENUMERATED_POINTS
        actions = [it for it in enum_report.items if it.kind is ItemKind.ACTION]
        assert len(actions) == len(enum_report.items) == 6
        assert enum_report.items[0].title == "Workload Management"
        assert enum_report.items[-1].title == "Code Review"

        sta_report = by_course["course-b"]
        assert sta_report.raw_text == excerpt_summary_actions
        assert sta_report.format is FormatClass.SUMMARY_THEN_ACTIONS
        kinds = [it.kind for it in sta_report.items]
        assert kinds == [ItemKind.OBSERVATION] * 5 + [ItemKind.ACTION] * 5

        for report in (enum_report, sta_report):
            raw = report.raw_text.encode("utf-8")
            spans = [it.source_span for it in report.items]
            rebuilt = [raw[: spans[0][0]]]
            for i, (start, end) in enumerate(spans):
                rebuilt.append(raw[start:end])
                nxt = spans[i + 1][0] if i + 1 < len(spans) else len(raw)
                rebuilt.append(raw[end:nxt])
            assert b"".join(rebuilt) == raw  # exact round trip


# -- criterion: redaction guarantee ------------------------------------------------

def test_criterion_redaction_guarantee():
    with time_box("redaction guarantee", 10.0):
        rng = random.Random(1234)
        first_names = ["Anna", "Bo", "Christine", "Dorte", "Emil", "Freja",
                       "Person", "Søren", "Maja", "Kasper"]
        last_names = ["Hansen", "Jensen", "Nielsen", "Krogh", "Ørsted", "Lund"]
        fillers = ["the slides were fine", "og det er fint", "exam workload",
                   "group work was great", "[PERSON]", "x", "..."]

        for _ in range(1000):
            roster = {
                f"{rng.choice(first_names)} {rng.choice(last_names)}"
                for _ in range(rng.randint(1, 5))
            }
            parts = []
            for _ in range(rng.randint(0, 14)):
                roll = rng.random()
                if roll < 0.35:
                    name = rng.choice(sorted(roster))
                    parts.append(rng.choice([name, name.upper(), name.lower(),
                                             name.split()[0], name.split()[1]]))
                else:
                    parts.append(rng.choice(fillers))
            text = " ".join(parts)

            result = scrub_names(text, roster)
            remaining = result.text.replace("[PERSON]", " ").lower()
            for name in roster:
                for token in [name] + name.split():
                    if len(token) >= 3:
                        assert not re.search(
                            rf"(?<!\w){re.escape(token.lower())}(?!\w)", remaining
                        ), (text, result.text, token)
            again = scrub_names(result.text, roster)
            assert again.text == result.text
            assert again.leak_count == 0


# -- criterion: token-budget invariant ----------------------------------------------

def test_criterion_token_budget_invariant():
    with time_box("token-budget invariant", 10.0):
        rng = random.Random(4321)
        accepted = 0
        for _ in range(1000):
            n = rng.randint(1, 10)
            texts = ["t" * rng.randint(1, 5000) for _ in range(n)]
            bundle = make_bundle("c", *texts)
            limits = ModelLimits(
                context_tokens=rng.randint(200, 8192),
                prompt_overhead_tokens=rng.randint(0, 160),
            )
            try:
                budget = compute_summary_budget(bundle, limits)
            except InputTooLarge:
                continue
            accepted += 1
            assert (
                budget.input_token_estimate
                + limits.prompt_overhead_tokens
                + budget.summary_budget_x
                <= limits.context_tokens
            )
            assert 128 <= budget.summary_budget_x <= 512
            kept = n - budget.dropped_response_count
            joined = concatenate_responses(bundle, budget)
            assert joined == SEPARATOR.join(texts[:kept])  # whole tail drops only
            assert estimate_tokens(joined) == budget.input_token_estimate
        assert accepted > 100  # the sweep must actually exercise the invariant


# -- criterion: factuality oracle --------------------------------------------------

def test_criterion_factuality_oracle():
    stopwords = default_lexicons().stopwords

    def oracle_words(text):
        tokens = re.findall(r"[^\W\d_]+", text.lower(), re.UNICODE)
        return {t for t in tokens if len(t) >= 3 and t not in stopwords}

    def oracle_jaccard(a, b):
        if not a and not b:
            return 1.0
        if not a or not b:
            return 0.0
        return len(a & b) / len(a | b)

    with time_box("factuality oracle", 5.0):
        bundle = make_bundle(
            "c",
            "The workload was excessive and assignments piled up before the exam.",
            "Group work sessions helped me understand the material better.",
            "Slides were confusing, past solutions would support understanding.",
            "The exam did not match the weekly exercises at all.",
            "More feedback on the coding projects would be appreciated.",
            "Online lectures were fine but questions got lost.",
        )
        raw = (
            "1. **Workload:** Reduce the excessive workload before the exam.\n"
            "2. **Group Work:** Keep the group work sessions that help understanding.\n"
            "3. **Materials:** Clarify the confusing slides and share past solutions.\n"
            "4. **Exam Fit:** Align the exam with the weekly exercises.\n"
            "5. **Project Feedback:** Offer more feedback on the coding projects.\n"
            "6. **Online Questions:** Answer online questions from the lectures.\n"
            "7. **Parking:** Expand the campus parking garage immediately.\n"
            "8. **Catering:** Upgrade the cafeteria coffee machines.\n"
        )
        report = parse_report(raw, "c")
        assert len(report.items) == 8
        per_item, score, flags = factuality_coverage(report, bundle)

        for item, computed in zip(report.items, per_item):
            item_words = oracle_words(f"{item.title} {item.body}")
            expected = max(
                oracle_jaccard(item_words, oracle_words(r.text))
                for r in bundle.responses
            )
            assert computed.support == pytest.approx(expected, abs=1e-12)

        flagged = sorted(f.item_ordinal for f in flags)
        assert flagged == [7, 8]  # the planted off-topic items and only them
        assert score == pytest.approx(6 / 8)


# -- criterion: contradiction scenario ----------------------------------------------

def test_criterion_contradiction_scenario():
    with time_box("contradiction scenario", 1.0):
        bundle = make_bundle(
            "c", "I liked online teaching", "I did not like online teaching"
        )
        collapsed = parse_report("All students liked online teaching.", "c")
        flags = contradiction_check(bundle, collapsed)
        assert len(flags) == 1
        assert flags[0].kind is FlagKind.CONTRADICTION_COLLAPSE
        assert "'online'" in flags[0].detail

        hedged = parse_report(
            "Mixed opinions on online teaching, while others preferred in-person.",
            "c",
        )
        assert contradiction_check(bundle, hedged) == []


# -- criterion: sentiment retention --------------------------------------------------

def test_criterion_sentiment_retention():
    with time_box("sentiment retention", 1.0):
        bundle = make_bundle(
            "c", "The TA was super helpful", "The handbook was hopeless"
        )
        diluted = parse_report(
            "The assistance was fine and the handbook could be better.", "c"
        )
        flags = sentiment_retention(bundle, diluted)
        assert sorted(f.detail for f in flags) == [
            "strong negative phrase 'hopeless' not conveyed",
            "strong positive phrase 'super helpful' not conveyed",
        ]

        retained = parse_report(
            "The TA was extremely helpful while the handbook felt hopeless.", "c"
        )
        assert sentiment_retention(bundle, retained) == []

        # polarity must match: strong positive does not cover a lost negative
        half = parse_report("Everyone found the staff super helpful.", "c")
        half_flags = sentiment_retention(bundle, half)
        assert [f.detail for f in half_flags] == [
            "strong negative phrase 'hopeless' not conveyed"
        ]


# -- criterion: agreement stats --------------------------------------------------------

def oracle_alpha(units):
    pairable = [u for u in units if len(u) >= 2]
    values = [v for u in pairable for v in u]
    n = len(values)
    marginals = Counter(values)
    categories = sorted(marginals)

    def delta_sq(c, k):
        lo, hi = min(c, k), max(c, k)
        between = sum(marginals[g] for g in categories if lo <= g <= hi)
        return (between - (marginals[c] + marginals[k]) / 2) ** 2

    observed = sum(
        sum(delta_sq(a, b) for i, a in enumerate(u) for j, b in enumerate(u) if i != j)
        / (len(u) - 1)
        for u in pairable
    ) / n
    expected = sum(
        delta_sq(a, b)
        for i, a in enumerate(values)
        for j, b in enumerate(values)
        if i != j
    ) / (n * (n - 1))
    return 1.0 if expected == 0 else 1.0 - observed / expected


def test_criterion_agreement_stats(tmp_path):
    with time_box("agreement stats", 10.0):
        store = RatingStore(tmp_path / "unanimous.jsonl")
        for report in range(6):
            for rater in ("a", "b", "c"):
                store.record_rating(
                    LikertRating(rater, f"rep{report}", Dimension.FACTUALITY, 4)
                )
        stats = store.agreement_stats(Dimension.FACTUALITY)
        assert stats.exact_agreement_rate == 1.0
        assert stats.mean_abs_diff == 0.0
        assert stats.krippendorff_alpha_ordinal == 1.0

        rng = random.Random(777)
        for _ in range(100):
            n_raters = rng.randint(2, 5)
            n_reports = rng.randint(1, 10)
            units = [
                [rng.randint(1, 5) for _ in range(rng.randint(2, n_raters))]
                for _ in range(n_reports)
            ]
            assert ordinal_alpha(units) == pytest.approx(oracle_alpha(units), abs=1e-9)

        # divergence queue: exactly the (report, dimension) pairs with range >= 2
        rng = random.Random(778)
        records = []
        seq = 0
        expected_pairs = set()
        for report in (f"r{i}" for i in range(12)):
            for dimension in Dimension:
                scores = {}
                for rater in ("a", "b", "c")[: rng.randint(1, 3)]:
                    seq += 1
                    score = rng.randint(1, 5)
                    scores[rater] = score
                    records.append(
                        LikertRating(rater, report, dimension, score, sequence=seq)
                    )
                if len(scores) >= 2 and max(scores.values()) - min(scores.values()) >= 2:
                    expected_pairs.add((report, dimension))
        queue = divergence_queue(records, min_range=2)
        assert {(e.report_id, e.dimension) for e in queue} == expected_pairs


# -- criterion: CLI/API contract ----------------------------------------------------------

def test_criterion_cli_api_contract(tmp_path):
    with time_box("CLI/API contract", 10.0):
        corpus = tmp_path / "corpus.csv"
        corpus.write_text(
            "course_id,response_id,text,respondent_name\n"
            'C1,r1,"The workload was heavy.",\n'
            'C1,r2,"I liked the labs.",\n',
            encoding="utf-8",
        )
        out = tmp_path / "runs"

        # exit-code matrix
        assert run_command(["ingest", "--corpus", str(corpus)]) == 0
        assert run_command(["nonsense"]) == 1
        assert run_command(["ingest", "--nope"]) == 1
        assert run_command(["ingest", "--corpus", str(tmp_path / "missing.csv")]) == 2
        assert run_command(
            ["run", "--corpus", str(corpus), "--backend", "echo",
             "--out", str(out), "--run-id", "api"]
        ) == 0
        assert run_command(
            ["run", "--corpus", str(tmp_path / "missing.csv"), "--out", str(out)]
        ) == 2

        # rating POST -> GET round trip preserves latest-wins
        client = TestClient(create_app(out, Config()))
        rid = "api:C1"
        first = client.post(
            f"/api/reports/{rid}/ratings",
            json={"rater_id": "ann", "dimension": "ACTIONABILITY", "score": 2},
        )
        assert first.status_code == 201
        second = client.post(
            f"/api/reports/{rid}/ratings",
            json={"rater_id": "ann", "dimension": "ACTIONABILITY", "score": 5},
        )
        assert second.status_code == 201
        ratings = client.get(f"/api/reports/{rid}").json()["ratings"]
        act = [r for r in ratings if r["dimension"] == "ACTIONABILITY"]
        assert act == [
            {"rater_id": "ann", "dimension": "ACTIONABILITY", "score": 5,
             "comment": None, "sequence": 2}
        ]
        assert client.post(
            f"/api/reports/{rid}/ratings",
            json={"rater_id": "ann", "dimension": "ACTIONABILITY", "score": 9},
        ).status_code == 422
