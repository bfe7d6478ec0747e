"""Command-line entry points.

Exit codes: 0 success, 1 usage error, 2 runtime error.

Subcommands: ingest (validate a corpus and print stats), run (full
pipeline), assess (re-run quality gates on an existing run), rate (import
ratings), agreement, diverge, and serve (HTTP API + review UI).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .backends import Backend, EchoBackend, HttpBackend, MockBackend, load_mock_script
from .config import Config
from .corpus import corpus_stats, load_corpus
from .errors import EvalSynthError
from .figures import render_run_figures
from .pipeline import PipelineOptions, run_pipeline
from .quality import assess
from .ratings import Dimension, RatingStore
from . import runs as runstore
from .structure import report_to_json


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 1 on usage errors, not argparse's 2
        raise UsageError(f"{self.prog}: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="evalsynth", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="validate a corpus file and print stats")
    ingest.add_argument("--corpus", required=True)
    ingest.add_argument("--roster")

    run = sub.add_parser("run", help="run the full feedback pipeline")
    run.add_argument("--corpus", required=True)
    run.add_argument("--roster")
    run.add_argument("--backend", choices=["echo", "mock", "live"], default="echo")
    run.add_argument("--mock-script", help="fixture file for --backend mock")
    run.add_argument("--strict-mock", action="store_true",
                     help="fail on fixture misses instead of echoing")
    run.add_argument("--out", required=True, help="runs output directory")
    run.add_argument("--run-id", help="default: timestamp + corpus digest prefix")
    run.add_argument("--config", help="key = value config file")
    run.add_argument("--course", action="append",
                     help="restrict to this course id (repeatable)")

    assess_cmd = sub.add_parser("assess", help="re-run quality gates on an existing run")
    assess_cmd.add_argument("--out", required=True)
    assess_cmd.add_argument("--run", required=True, dest="run_id")
    assess_cmd.add_argument("--corpus", help="default: corpus recorded in the manifest")
    assess_cmd.add_argument("--roster", help="default: roster recorded in the manifest")
    assess_cmd.add_argument("--config")

    rate = sub.add_parser("rate", help="import ratings from a JSONL file")
    rate.add_argument("--out", required=True)
    rate.add_argument("--run", required=True, dest="run_id")
    rate.add_argument("--file", required=True)

    agreement = sub.add_parser("agreement", help="print inter-rater agreement stats")
    agreement.add_argument("--out", required=True)
    agreement.add_argument("--run", required=True, dest="run_id")
    agreement.add_argument("--dim", choices=[d.value for d in Dimension])

    diverge = sub.add_parser("diverge", help="print the divergence queue")
    diverge.add_argument("--out", required=True)
    diverge.add_argument("--run", required=True, dest="run_id")
    diverge.add_argument("--min-range", type=int, default=2)

    serve = sub.add_parser("serve", help="serve the HTTP API and review UI")
    serve.add_argument("--out", required=True)
    serve.add_argument("--port", type=int)
    serve.add_argument("--config")

    return parser


def _make_backend(args, config: Config) -> Backend:
    limits = config.model_limits()
    if args.backend == "echo":
        return EchoBackend(limits)
    if args.backend == "mock":
        if not args.mock_script:
            raise UsageError("evalsynth run: --backend mock requires --mock-script")
        script = load_mock_script(args.mock_script, strict=args.strict_mock)
        return MockBackend(script, limits)
    return HttpBackend(
        url=config.get("backend.url"),
        model=config.get("backend.model"),
        api_key_env=config.get("backend.api_key_env") or None,
        timeout_ms=config.get_int("backend.timeout_ms"),
        limits=limits,
    )


def _cmd_ingest(args) -> int:
    bundles = load_corpus(args.corpus, args.roster)
    stats = corpus_stats(bundles)
    print(
        f"{stats.course_count} courses, {stats.response_count} responses, "
        f"min {stats.min_responses_per_course}, max {stats.max_responses_per_course}"
    )
    print(f"singleton courses: {stats.singleton_course_count}")
    if not args.roster:
        print("no roster given: redaction coverage is unverifiable", file=sys.stderr)
    return 0


def _config_snapshot(args, config: Config, corpus_path: Path, roster_path: Path | None) -> dict:
    snapshot = {
        "corpus_path": str(corpus_path.resolve()),
        "roster_path": str(roster_path.resolve()) if roster_path else "",
        "roster_provided": roster_path is not None,
        "backend": args.backend if hasattr(args, "backend") else "",
        "budget_heuristic": runstore.BUDGET_HEURISTIC_NOTE,
    }
    for key in (
        "context_tokens",
        "prompt_overhead_tokens",
        "quality.support_threshold",
        "quality.sparse_max",
        "quality.dense_min",
    ):
        snapshot[key] = config.get(key)
    return snapshot


def _cmd_run(args) -> int:
    config = Config.load(args.config)
    corpus_path = Path(args.corpus)
    roster_path = Path(args.roster) if args.roster else None
    bundles = load_corpus(corpus_path, roster_path)
    backend = _make_backend(args, config)
    backend.max_in_flight = config.get_int("backend.max_in_flight")
    run_id = args.run_id or runstore.new_run_id(corpus_path)

    options = PipelineOptions(
        limits=config.model_limits(),
        quality=config.quality_config(),
        lexicons=config.lexicons(),
        run_id=run_id,
        max_workers=config.get_int("backend.max_in_flight"),
        courses=set(args.course) if args.course else None,
    )
    reports, drafts, manifest = run_pipeline(bundles, backend, options)
    manifest.config = _config_snapshot(args, config, corpus_path, roster_path)

    paths = runstore.write_run(args.out, manifest, reports, drafts)
    sizes = {b.course_id: len(b.responses) for b in bundles}
    render_run_figures(paths.figures_dir, reports, sizes)

    errors = sum(1 for o in manifest.outcomes.values() if o["status"] == "ERROR")
    skipped = sum(1 for o in manifest.outcomes.values() if o["status"] == "SKIPPED")
    print(f"run {run_id}: {len(reports)} report(s), {errors} error(s), {skipped} skipped")
    print(f"output: {paths.root}")
    if roster_path is None:
        print("no roster given: redaction coverage is unverifiable", file=sys.stderr)
    for course_id, outcome in manifest.outcomes.items():
        if outcome["status"] == "ERROR":
            print(f"  ERROR {course_id}: {outcome['message']}", file=sys.stderr)
    return 0 if errors == 0 else 2


def _cmd_assess(args) -> int:
    config = Config.load(args.config)
    manifest = runstore.load_manifest(args.out, args.run_id)
    corpus_path = args.corpus or manifest.get("config", {}).get("corpus_path")
    roster_path = args.roster or manifest.get("config", {}).get("roster_path") or None
    if not corpus_path:
        raise EvalSynthError(
            "manifest records no corpus path; pass --corpus to re-assess"
        )
    bundles = {b.course_id: b for b in load_corpus(corpus_path, roster_path)}
    paths = runstore.RunPaths(args.out, args.run_id)
    reports = runstore.load_reports(args.out, args.run_id)
    assessed = []
    for report in reports:
        bundle = bundles.get(report.course_id)
        if bundle is None:
            print(f"  skipping {report.course_id}: not in corpus", file=sys.stderr)
            continue
        report = assess(
            report, bundle, config=config.quality_config(), lexicons=config.lexicons()
        )
        paths.report_path(report.course_id).write_text(
            report_to_json(report), encoding="utf-8"
        )
        assessed.append(report)
    runstore.write_quality_summary(paths, assessed)
    sizes = {b.course_id: len(b.responses) for b in bundles.values()}
    render_run_figures(paths.figures_dir, assessed, sizes)
    print(f"re-assessed {len(assessed)} report(s) in run {args.run_id}")
    return 0


def _store_for(args) -> RatingStore:
    paths = runstore.RunPaths(args.out, args.run_id)
    return RatingStore(
        paths.ratings_path,
        known_reports=runstore.known_report_ids(args.out, args.run_id),
    )


def _cmd_rate(args) -> int:
    store = _store_for(args)
    count = store.import_file(args.file)
    print(f"imported {count} rating(s) into run {args.run_id}")
    return 0


def _cmd_agreement(args) -> int:
    store = _store_for(args)
    dimensions = [Dimension(args.dim)] if args.dim else list(Dimension)
    for dimension in dimensions:
        stats = store.agreement_stats(dimension)
        print(
            f"{dimension.value}: reports {stats.n_reports}, raters {stats.n_raters}, "
            f"exact agreement {stats.exact_agreement_rate:.3f}, "
            f"mean |diff| {stats.mean_abs_diff:.3f}, "
            f"alpha(ordinal) {stats.krippendorff_alpha_ordinal:.4f}"
        )
    return 0


def _cmd_diverge(args) -> int:
    store = _store_for(args)
    entries = store.divergence_queue(args.min_range)
    if not entries:
        print("no divergences")
        return 0
    for entry in entries:
        scores = ", ".join(f"{rater}={score}" for rater, score in entry.scores)
        print(f"{entry.report_id} {entry.dimension.value} range={entry.range} [{scores}]")
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    config = Config.load(args.config)
    serve(args.out, config, port=args.port)
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "run": _cmd_run,
    "assess": _cmd_assess,
    "rate": _cmd_rate,
    "agreement": _cmd_agreement,
    "diverge": _cmd_diverge,
    "serve": _cmd_serve,
}


def run_command(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (EvalSynthError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))
