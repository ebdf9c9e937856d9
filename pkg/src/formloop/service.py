"""HTTP review service.

A thin FastAPI layer over ProjectStore: reads replay the audit log, the
single mutating endpoint appends to it. Stale edits surface as 409 so a
second reviewer's conflicting click never silently wins.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel, Field

from . import active
from .errors import (
    EmptyIterationError,
    FormatError,
    InvalidTransitionError,
    NotFoundError,
)
from .model import BBox
from .store import (
    ProjectStore,
    entity_to_dict,
    link_result_to_dict,
    prediction_to_dict,
)

QUEUE_STRATEGIES = ("uncertainty", "mean_entropy", "min_margin")


class ActionBody(BaseModel):
    kind: str
    annotation_id: str | None = None
    payload: dict = Field(default_factory=dict)
    actor: str = "reviewer"


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(store: ProjectStore) -> FastAPI:
    app = FastAPI(title="formloop review service", docs_url=None, redoc_url=None)

    @app.exception_handler(NotFoundError)
    async def _not_found(request: Request, exc: NotFoundError):
        return _error(404, str(exc))

    @app.exception_handler(InvalidTransitionError)
    async def _conflict(request: Request, exc: InvalidTransitionError):
        return _error(409, str(exc))

    @app.exception_handler(EmptyIterationError)
    async def _empty_iteration(request: Request, exc: EmptyIterationError):
        return _error(409, str(exc))

    @app.exception_handler(FormatError)
    async def _bad_format(request: Request, exc: FormatError):
        return _error(400, str(exc))

    @app.exception_handler(ValueError)
    async def _bad_value(request: Request, exc: ValueError):
        return _error(400, str(exc))

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        return _error(400, str(exc))

    @app.get("/api/project")
    def get_project():
        docs = store.list_docs()
        exported = store.exported_doc_ids()
        pending = reviewed = 0
        for doc_id in docs:
            if not store.has_annotations(doc_id):
                continue
            state = store.doc_annotations(doc_id)
            if active.is_fully_reviewed(state):
                reviewed += 1
            elif state:
                pending += 1
        schema = store.schema()
        return {
            "name": store.name,
            "config": store.config().to_dict(),
            "schema": schema.to_dict() if schema else None,
            "docs": {
                "total": len(docs),
                "pending_review": pending,
                "fully_reviewed": reviewed,
                "exported": len(exported),
            },
            "iterations": store.iteration_numbers(),
        }

    @app.get("/api/queue")
    def get_queue(strategy: str = "uncertainty", k: int | None = None):
        if strategy not in QUEUE_STRATEGIES:
            return _error(400, f"unknown strategy {strategy!r}")
        if k is not None and k < 1:
            return _error(400, "k must be at least 1")
        resolved = store.config().uncertainty if strategy == "uncertainty" else strategy
        return {"strategy": resolved, "queue": active.ranked_queue(store, k, resolved)}

    @app.get("/api/docs/{doc_id}")
    def get_doc(doc_id: str):
        document = store.load_document(doc_id)
        body = {
            "doc_id": doc_id,
            "page": {"width": document.page.width, "height": document.page.height},
            "image_url": (
                f"/api/docs/{doc_id}/image" if store.image_path(doc_id) else None
            ),
            "tokens": [
                {"i": t.index, "text": t.text, "box": t.box.as_list()}
                for t in document.tokens
            ],
            "entities": [],
            "links": None,
            "predictions": [],
            "annotations": [],
        }
        try:
            entities, links, predictions, _ = store.load_entities(doc_id)
        except NotFoundError:
            return body
        body["entities"] = [entity_to_dict(e) for e in entities]
        body["links"] = link_result_to_dict(links)
        body["predictions"] = [prediction_to_dict(p) for p in predictions]
        if store.has_annotations(doc_id):
            state = store.doc_annotations(doc_id)
            body["annotations"] = [
                r.to_dict()
                for r in sorted(state.values(), key=lambda r: r.annotation_id)
            ]
        return body

    @app.get("/api/docs/{doc_id}/image")
    def get_image(doc_id: str):
        path = store.image_path(doc_id)
        if path is None:
            raise NotFoundError(f"document {doc_id} has no image")
        media = "image/png" if path.suffix == ".png" else "application/octet-stream"
        return FileResponse(path, media_type=media)

    @app.post("/api/docs/{doc_id}/actions")
    def post_action(doc_id: str, body: ActionBody):
        _check_boxes(store, doc_id, body)
        action, state = store.commit_action(
            doc_id, body.kind, body.annotation_id, body.payload, body.actor
        )
        response = action.to_dict()
        response["annotations"] = [
            r.to_dict() for r in sorted(state.values(), key=lambda r: r.annotation_id)
        ]
        return response

    @app.post("/api/iterations")
    def post_iteration():
        _, manifest = active.build_iteration(store)
        return manifest

    @app.get("/api/labels")
    def get_labels():
        schema = store.schema()
        return schema.to_dict() if schema else {"labels": []}

    return app


def _check_boxes(store: ProjectStore, doc_id: str, body: ActionBody):
    """Reject new boxes that fall outside the page before they hit the log."""
    candidates = []
    if body.kind == "edit_box" and "new" in body.payload:
        candidates.append(body.payload["new"])
    elif body.kind == "add" and "box" in body.payload:
        candidates.append(body.payload["box"])
    if not candidates:
        return
    page = store.load_document(doc_id).page
    for raw in candidates:
        box = BBox.from_list(raw)
        if box.x2 > page.width or box.y2 > page.height:
            raise ValueError(
                f"box {box.as_list()} exceeds page {page.width}x{page.height}"
            )


def serve(store: ProjectStore, host: str = "127.0.0.1", port: int = 8400):
    """Run the review service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(store), host=host, port=port, log_level="warning")
