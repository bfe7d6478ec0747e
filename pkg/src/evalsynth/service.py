"""Read-mostly HTTP API over completed runs, plus the review UI assets.

Pipeline runs stay CLI-only; the service exposes runs, reports with their
quality assessments and (scrubbed) source responses, the rating workflow,
agreement statistics, and the divergence queue.  Every response is JSON and
carries a ``schema_version`` field.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import runs as runstore
from .config import Config
from .corpus import CourseBundle, load_corpus
from .errors import EvalSynthError, InsufficientRaters, RunNotFound, UnknownReport
from .quality import scrub_names
from .ratings import (
    Dimension,
    LikertRating,
    RatingStore,
    agreement_stats,
    divergence_queue,
)
from .structure import report_to_dict

SCHEMA_VERSION = 1

_FALLBACK_INDEX = """<!doctype html>
<html><head><title>evalsynth</title></head>
<body><h1>evalsynth API</h1>
<p>No review UI bundle is installed; the JSON API is available under /api.</p>
</body></html>
"""


class RatingIn(BaseModel):
    rater_id: str = Field(min_length=1)
    dimension: Dimension
    score: int = Field(ge=1, le=5)
    comment: str | None = None


def _payload(data: dict, status_code: int = 200) -> JSONResponse:
    return JSONResponse({"schema_version": SCHEMA_VERSION, **data}, status_code=status_code)


class _State:
    """Lazy caches over the runs directory; one rating store per run."""

    def __init__(self, out_dir: Path, config: Config):
        self.out_dir = out_dir
        self.config = config
        self._stores: dict[str, RatingStore] = {}
        self._bundles: dict[str, dict[str, CourseBundle]] = {}
        self._lock = threading.Lock()

    def run_ids(self) -> list[str]:
        return runstore.list_runs(self.out_dir)

    def manifest(self, run_id: str) -> dict:
        return runstore.load_manifest(self.out_dir, run_id)

    def store(self, run_id: str) -> RatingStore:
        with self._lock:
            if run_id not in self._stores:
                paths = runstore.RunPaths(self.out_dir, run_id)
                self._stores[run_id] = RatingStore(
                    paths.ratings_path,
                    known_reports=runstore.known_report_ids(self.out_dir, run_id),
                )
            return self._stores[run_id]

    def bundles(self, run_id: str) -> dict[str, CourseBundle]:
        with self._lock:
            if run_id not in self._bundles:
                manifest = self.manifest(run_id)
                corpus_path = manifest.get("config", {}).get("corpus_path")
                roster_path = manifest.get("config", {}).get("roster_path") or None
                loaded: dict[str, CourseBundle] = {}
                if corpus_path and Path(corpus_path).is_file():
                    for bundle in load_corpus(corpus_path, roster_path):
                        loaded[bundle.course_id] = bundle
                self._bundles[run_id] = loaded
            return self._bundles[run_id]

    def all_ratings(self):
        records = []
        for run_id in self.run_ids():
            records.extend(self.store(run_id).records)
        return records

    def split_report_id(self, report_id: str) -> tuple[str, str]:
        if ":" not in report_id:
            raise UnknownReport(f"malformed report id {report_id!r}")
        run_id, course_id = report_id.split(":", 1)
        if run_id not in self.run_ids():
            raise UnknownReport(f"unknown run in report id {report_id!r}")
        return run_id, course_id


def create_app(out_dir: str | Path, config: Config | None = None) -> FastAPI:
    config = config or Config()
    out_dir = Path(out_dir)
    if not runstore.list_runs(out_dir):
        raise RunNotFound(f"no completed runs under {out_dir}")
    state = _State(out_dir, config)
    app = FastAPI(title="evalsynth", docs_url=None, redoc_url=None)

    @app.exception_handler(StarletteHTTPException)
    async def http_error(_request: Request, exc: StarletteHTTPException):
        return _payload({"error": str(exc.detail)}, status_code=exc.status_code)

    @app.exception_handler(RequestValidationError)
    async def validation_error(_request: Request, exc: RequestValidationError):
        errors = [
            {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
            for err in exc.errors()
        ]
        return _payload({"error": "validation failed", "errors": errors}, status_code=422)

    @app.exception_handler(UnknownReport)
    async def unknown_report(_request: Request, exc: UnknownReport):
        return _payload({"error": str(exc)}, status_code=404)

    @app.exception_handler(RunNotFound)
    async def run_not_found(_request: Request, exc: RunNotFound):
        return _payload({"error": str(exc)}, status_code=404)

    @app.exception_handler(EvalSynthError)
    async def domain_error(_request: Request, exc: EvalSynthError):
        return _payload({"error": str(exc)}, status_code=409)

    @app.get("/api/runs")
    def list_runs():
        entries = []
        for run_id in state.run_ids():
            manifest = state.manifest(run_id)
            outcomes = manifest.get("outcomes", {})
            entries.append(
                {
                    "run_id": run_id,
                    "course_count": len(outcomes),
                    "report_count": manifest.get("report_count", 0),
                }
            )
        return _payload({"runs": entries})

    @app.get("/api/runs/{run_id}/reports")
    def list_reports(run_id: str):
        if run_id not in state.run_ids():
            raise RunNotFound(f"unknown run {run_id!r}")
        entries = []
        for report in runstore.load_reports(state.out_dir, run_id):
            qa = report.quality
            entries.append(
                {
                    "report_id": runstore.report_id(run_id, report.course_id),
                    "course_id": report.course_id,
                    "format": report.format.value,
                    "item_count": len(report.items),
                    "factuality_score": qa.factuality_score if qa else None,
                    "actionability_score": qa.actionability_score if qa else None,
                    "flag_kinds": sorted({f.kind.value for f in qa.flags}) if qa else [],
                }
            )
        return _payload({"run_id": run_id, "reports": entries})

    # the :path converter keeps report ids with '/' in the course id reachable
    @app.get("/api/reports/{report_id:path}")
    def get_report(report_id: str, raw: bool = False):
        run_id, course_id = state.split_report_id(report_id)
        report = runstore.load_report(state.out_dir, run_id, course_id)
        bundle = state.bundles(run_id).get(course_id)
        if raw and not config.get_bool("service.allow_raw"):
            raise StarletteHTTPException(
                status_code=403, detail="raw responses are disabled (service.allow_raw)"
            )
        sources = []
        roster_available = False
        if bundle is not None:
            roster_available = bool(bundle.roster)
            for response in bundle.responses:
                text = response.text
                if not raw:
                    text = scrub_names(text, bundle.roster).text
                sources.append(
                    {
                        "response_id": response.response_id,
                        "text": text,
                        "language_hint": response.language_hint.value,
                    }
                )
        ratings = [
            {
                "rater_id": r.rater_id,
                "dimension": r.dimension.value,
                "score": r.score,
                "comment": r.comment,
                "sequence": r.sequence,
            }
            for (_, rid, _), r in sorted(state.store(run_id).effective().items())
            if rid == report_id
        ]
        return _payload(
            {
                "report_id": report_id,
                "report": report_to_dict(report),
                "source_responses": sources,
                "roster_available": roster_available,
                "ratings": ratings,
            }
        )

    @app.post("/api/reports/{report_id:path}/ratings", status_code=201)
    def post_rating(report_id: str, rating: RatingIn):
        run_id, _ = state.split_report_id(report_id)
        sequence = state.store(run_id).record_rating(
            LikertRating(
                rater_id=rating.rater_id,
                report_id=report_id,
                dimension=rating.dimension,
                score=rating.score,
                comment=rating.comment,
            )
        )
        return _payload({"receipt": {"sequence": sequence, "report_id": report_id}}, 201)

    @app.get("/api/agreement")
    def get_agreement(dim: Dimension | None = None):
        records = state.all_ratings()
        dimensions = [dim] if dim else list(Dimension)
        stats = {}
        for dimension in dimensions:
            try:
                s = agreement_stats(records, dimension)
                stats[dimension.value] = {
                    "n_reports": s.n_reports,
                    "n_raters": s.n_raters,
                    "exact_agreement_rate": s.exact_agreement_rate,
                    "mean_abs_diff": s.mean_abs_diff,
                    "krippendorff_alpha_ordinal": s.krippendorff_alpha_ordinal,
                }
            except InsufficientRaters:
                stats[dimension.value] = None
        return _payload({"agreement": stats})

    @app.get("/api/divergence")
    def get_divergence(min_range: int = 2):
        entries = [
            {
                "report_id": e.report_id,
                "dimension": e.dimension.value,
                "scores": [{"rater_id": r, "score": s} for r, s in e.scores],
                "range": e.range,
            }
            for e in divergence_queue(state.all_ratings(), min_range)
        ]
        return _payload({"divergence": entries})

    ui_dir = Path(config.get("service.ui_dir"))
    if ui_dir.is_dir() and (ui_dir / "index.html").is_file():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def index() -> str:
            return _FALLBACK_INDEX

    return app


def serve(out_dir: str | Path, config: Config | None = None, port: int | None = None) -> None:
    """Run the service until interrupted (pipeline runs stay CLI-only)."""
    import uvicorn

    config = config or Config()
    app = create_app(out_dir, config)
    uvicorn.run(app, host="127.0.0.1", port=port or config.get_int("service.port"))
