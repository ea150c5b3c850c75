"""HTTP assisted-curation backend."""

from __future__ import annotations

import os
import uuid

from fastapi import FastAPI, Header, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from ..corpus import AttributeKind
from .store import CurationStore, InvalidVerdictError, UnknownItemError

PAGE_SIZE = 50


class VerdictBody(BaseModel):
    event_id: str
    verdict: str
    corrected_label: str | None = None


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def create_app(store: CurationStore, reinfer_fn=None, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="oncoabstract curation service")
    app.state.store = store

    @app.exception_handler(Exception)
    async def unhandled(request: Request, exc: Exception):
        return _error(500, "internal", str(exc))

    @app.get("/api/queue")
    def queue(response: Response, attribute: str | None = None,
              status: str | None = None, page: int = 0):
        if attribute is not None:
            try:
                AttributeKind(attribute)
            except ValueError:
                return _error(400, "unknown_attribute", f"unknown attribute {attribute!r}")
        if status is not None and status not in ("pending", "accepted", "corrected"):
            return _error(400, "unknown_status", f"unknown status {status!r}")
        if page < 0:
            return _error(400, "bad_page", "page must be >= 0")
        items, total = store.queue(attribute=attribute, status=status,
                                   page=page, page_size=PAGE_SIZE)
        response.headers["X-Total-Count"] = str(total)
        return {"items": [i.to_dict() for i in items], "page": page,
                "page_size": PAGE_SIZE, "total": total}

    @app.get("/api/patients/{patient_id}")
    def patient(patient_id: str):
        try:
            p = store.bundle.patient(patient_id)
        except KeyError:
            return _error(404, "unknown_patient", f"no patient {patient_id!r}")
        items = store.patient_items(patient_id)
        docs = {d.doc_id: d.text for d in p.documents}
        for item in items:  # provenance re-check before anything leaves the server
            for entry in item.rationale.get("entries", []):
                text = docs.get(entry["doc_id"], "")
                if not (0 <= entry["char_start"] <= entry["char_end"] <= len(text)):
                    return _error(500, "bad_span",
                                  f"rationale span invalid for {item.extraction_id}")
        return {
            "patient_id": p.patient_id,
            "documents": [{"doc_id": d.doc_id, "kind": d.kind, "date": d.date,
                           "text": d.text} for d in p.documents],
            "registry": ({"diagnosis_date": p.registry.diagnosis_date,
                          "labels": p.registry.labels} if p.registry else None),
            "extractions": [i.to_dict() for i in items],
        }

    @app.post("/api/extractions/{extraction_id}/verdict")
    def verdict(extraction_id: str, body: VerdictBody,
                x_reviewer_id: str | None = Header(default=None)):
        try:
            item = store.submit_verdict(
                extraction_id, body.event_id, body.verdict,
                body.corrected_label, x_reviewer_id or "anonymous")
        except UnknownItemError:
            return _error(404, "unknown_extraction", f"no extraction {extraction_id!r}")
        except InvalidVerdictError as exc:
            return _error(422, "invalid_verdict", str(exc))
        return item.to_dict()

    @app.get("/api/stats")
    def stats():
        return store.stats()

    @app.get("/api/export")
    def export():
        import json
        lines = [json.dumps(row, ensure_ascii=False, separators=(",", ":"))
                 for row in store.export_rows()]
        return PlainTextResponse("\n".join(lines) + ("\n" if lines else ""),
                                 media_type="application/x-ndjson")

    @app.get("/api/labelspaces")
    def labelspaces():
        return {name: list(space.classes)
                for name, space in store.bundle.label_spaces.items()}

    @app.post("/api/admin/reinfer")
    def reinfer():
        if reinfer_fn is None:
            return _error(400, "no_reinfer", "service started without a checkpoint source")
        records = reinfer_fn()
        for rec in sorted(records, key=lambda r: (r.patient_id, r.attribute)):
            item = store.items.get(rec.extraction_id)
            if item is None:
                continue
            item.predicted_class = rec.predicted_class
            item.top5 = list(rec.top5)
            item.rationale = rec.rationale
        store.record_inference(str(uuid.uuid4()), {"n_items": len(records)})
        return {"updated": len(records)}

    if ui_dir and os.path.isdir(ui_dir):
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
