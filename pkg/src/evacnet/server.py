"""HTTP API over the notice store: feed, lookup, feedback, stats, queue.

Reads are open; POST /api/feedback requires the static reviewer token in
X-Reviewer-Token when one is configured. All timestamps are RFC 3339 UTC.
"""

from __future__ import annotations

from datetime import datetime

from fastapi import FastAPI, Header, HTTPException, Query, Request

from .classify import NoticeLabel
from .notices import (
    FeedbackAction,
    FeedbackBeforeNotice,
    FeedbackEntry,
    NoticeService,
    NoticeStore,
    UnknownNotice,
    record_to_json,
)
from .registry import Registry
from .timeutil import parse_rfc3339, utcnow


def _parse_at(at: str | None) -> datetime | None:
    if at is None:
        return None
    try:
        return parse_rfc3339(at)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=f"bad `at` timestamp: {exc}") from exc


def create_app(
    store: NoticeStore,
    index,
    registry: Registry | None = None,
    reviewer_token: str = "",
    ui_dir: str | None = None,
) -> FastAPI:
    service = NoticeService(store, index)
    app = FastAPI(title="evacnet", docs_url=None, redoc_url=None)

    # State FIPS prefix -> registry state code, for readable stats keys.
    state_names = {}
    if registry is not None:
        for row in registry.rows():
            state_names.setdefault(row.fips[:2], row.state)

    @app.get("/api/notices")
    def notices(at: str | None = None):
        stamp = _parse_at(at)
        return {"notices": [record_to_json(r) for r in store.active(stamp)]}

    @app.get("/api/feed.geojson")
    def feed(at: str | None = None):
        return service.geojson_feed(_parse_at(at))

    @app.get("/api/lookup")
    def lookup(lon: float, lat: float, at: str | None = None):
        records = service.lookup_point(lon, lat, _parse_at(at))
        return {"notices": [record_to_json(r) for r in records]}

    @app.post("/api/feedback")
    async def feedback(
        request: Request,
        x_reviewer_token: str | None = Header(default=None),
    ):
        if reviewer_token and x_reviewer_token != reviewer_token:
            raise HTTPException(status_code=401, detail="bad or missing reviewer token")
        body = await request.json()
        if not isinstance(body, dict):
            raise HTTPException(status_code=422, detail="body must be a JSON object")
        try:
            action = FeedbackAction(body["action"])
            corrected = body.get("corrected_label")
            entry = FeedbackEntry(
                notice_id=body["notice_id"],
                action=action,
                reviewer_id=body.get("reviewer_id", "anonymous"),
                at=parse_rfc3339(body["at"]) if body.get("at") else utcnow(),
                corrected_label=NoticeLabel(corrected) if corrected is not None else None,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=f"bad feedback entry: {exc}") from exc
        try:
            record = store.record_feedback(entry)
        except UnknownNotice:
            raise HTTPException(status_code=404, detail=f"no notice {body['notice_id']}")
        except FeedbackBeforeNotice as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"notice": record_to_json(record)}

    @app.get("/api/stats")
    def stats(by: str = Query(default="year")):
        try:
            counts = store.archive_stats(by)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        if by == "state":
            counts = {state_names.get(k, k): v for k, v in counts.items()}
        payload = {"by": by, "counts": {str(k): v for k, v in counts.items()}}
        if by == "year":
            payload["crosstab"] = {
                str(year): row for year, row in store.year_label_crosstab().items()
            }
        return payload

    @app.get("/api/review-queue")
    def review_queue(limit: int = Query(default=50, ge=1)):
        return {"notices": [record_to_json(r) for r in store.review_queue(limit)]}

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
