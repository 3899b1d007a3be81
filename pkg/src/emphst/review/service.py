"""HTTP review service backing the annotation UI.

JSON API, single process, no authentication (annotator ids are
self-declared). All writes are durably journaled before the response is
sent; the agreement endpoint recomputes from live data on every request so
annotators always see current numbers.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from emphst.evaluation import NoOverlap
from emphst.review.store import InvalidPayload, ReviewStore, StoreError, UnknownSample


class AnnotationBody(BaseModel):
    annotator_id: str
    verdict: str | None = None
    spans: list[list[int]] | None = None


class DecisionBody(BaseModel):
    decision: str
    tgt_text: str | None = None


def create_app(store: ReviewStore, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="emphst review service")

    @app.exception_handler(UnknownSample)
    async def unknown_sample(request, exc):
        return JSONResponse(status_code=404, content={"detail": f"unknown sample {exc}"})

    @app.exception_handler(InvalidPayload)
    async def invalid_payload(request, exc):
        return JSONResponse(
            status_code=422,
            content={"detail": str(exc), "violations": exc.violations},
        )

    @app.get("/api/samples")
    def list_samples(status: str | None = Query(default=None)):
        if status not in (None, "pending", "done"):
            raise HTTPException(status_code=422, detail="status must be pending or done")
        return {"samples": store.list_samples(status)}

    @app.get("/api/samples/{sample_id}")
    def get_sample(sample_id: str):
        return store.task_view(sample_id)

    @app.post("/api/samples/{sample_id}/annotations")
    def post_annotation(sample_id: str, body: AnnotationBody):
        payload: dict = {}
        if body.verdict is not None:
            payload["verdict"] = body.verdict
        if body.spans is not None:
            payload["spans"] = body.spans
        return store.submit_annotation(sample_id, body.annotator_id, payload)

    @app.post("/api/samples/{sample_id}/decision")
    def post_decision(sample_id: str, body: DecisionBody):
        return store.submit_decision(sample_id, body.decision, body.tgt_text)

    @app.get("/api/agreement")
    def agreement():
        try:
            return store.agreement()
        except StoreError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except (NoOverlap, ValueError) as exc:
            raise HTTPException(status_code=422, detail=f"no consensus yet: {exc}")

    @app.post("/api/export")
    def export():
        return store.export()

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app


def serve_review(store_path: str | Path, port: int, static_dir: str | Path | None = None) -> None:
    """Run the review service until interrupted. Blocks."""
    import uvicorn

    store = ReviewStore(store_path)
    if static_dir is None:
        bundled = Path(store_path) / "ui"
        static_dir = bundled if bundled.is_dir() else None
    app = create_app(store, static_dir=static_dir)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
