"""HTTP API for human studies, consumed by the annotation UI.

Routes live under ``/study/v1``; study videos are served statically from a
media root so item video paths resolve as ``/study/media/<relative path>``.
When a built UI bundle is supplied it is mounted at ``/ui``.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from dcgkit.study.core import (
    DuplicateJudgmentError,
    StudyError,
    StudyKind,
    StudyStore,
    UnknownAnnotatorError,
    UnknownItemError,
    UnknownStudyError,
    create_pairwise_study,
    create_vetting_study,
)

logger = logging.getLogger(__name__)


class PairwiseCreateRequest(BaseModel):
    study_id: str
    kind: str = StudyKind.PAIRWISE_PREFERENCE.value
    system_a: str
    videos_a: dict[str, str]
    system_b: str
    videos_b: dict[str, str]
    annotators: list[str]
    rng_seed: int = 0


class VettingCandidate(BaseModel):
    sample_id: str
    video_path: str
    html_code: str = ""


class VettingCreateRequest(BaseModel):
    study_id: str
    kind: str = StudyKind.CURATION_VETTING.value
    candidates: list[VettingCandidate]
    annotators: list[str]


class JudgmentRequest(BaseModel):
    item_id: str
    annotator_id: str
    choice: str
    reason: str = ""


def _error(status: int, exc: Exception) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": str(exc)})


def create_study_app(
    store: StudyStore,
    *,
    media_root: Optional[Path | str] = None,
    ui_dir: Optional[Path | str] = None,
) -> FastAPI:
    """Wire the study store into the /study/v1 HTTP surface."""
    app = FastAPI(title="dcgkit study service")

    @app.get("/study/v1/health")
    def health() -> dict:
        return {"status": "ok", "studies": len(store.list_studies())}

    @app.get("/study/v1/studies")
    def list_studies() -> dict:
        return {
            "studies": [
                {
                    "id": s.id,
                    "kind": s.kind.value,
                    "items": len(s.items),
                    "annotators": list(s.annotators),
                }
                for s in store.list_studies()
            ]
        }

    @app.post("/study/v1/studies/pairwise")
    def create_pairwise(request: PairwiseCreateRequest) -> JSONResponse:
        if request.kind != StudyKind.PAIRWISE_PREFERENCE.value:
            return _error(400, ValueError(f"kind must be {StudyKind.PAIRWISE_PREFERENCE.value}"))
        try:
            study = create_pairwise_study(
                request.study_id,
                (request.system_a, request.videos_a),
                (request.system_b, request.videos_b),
                request.annotators,
                rng_seed=request.rng_seed,
            )
            store.create(study)
        except StudyError as exc:
            return _error(400, exc)
        return JSONResponse(status_code=201, content=study.to_dict())

    @app.post("/study/v1/studies/vetting")
    def create_vetting(request: VettingCreateRequest) -> JSONResponse:
        if request.kind != StudyKind.CURATION_VETTING.value:
            return _error(400, ValueError(f"kind must be {StudyKind.CURATION_VETTING.value}"))
        try:
            study = create_vetting_study(
                request.study_id,
                [(c.sample_id, c.video_path, c.html_code) for c in request.candidates],
                request.annotators,
            )
            store.create(study)
        except StudyError as exc:
            return _error(400, exc)
        return JSONResponse(status_code=201, content=study.to_dict())

    @app.get("/study/v1/studies/{study_id}")
    def get_study(study_id: str) -> JSONResponse:
        try:
            return JSONResponse(content=store.get(study_id).to_dict())
        except UnknownStudyError as exc:
            return _error(404, exc)

    @app.get("/study/v1/studies/{study_id}/next")
    def next_item(study_id: str, annotator: str) -> JSONResponse:
        try:
            item = store.next_item(study_id, annotator)
        except (UnknownStudyError, UnknownAnnotatorError) as exc:
            return _error(404, exc)
        if item is None:
            progress = store.progress(study_id)
            return JSONResponse(content={"done": True, "progress": progress})
        return JSONResponse(content={"done": False, "item": item.to_dict()})

    @app.post("/study/v1/studies/{study_id}/judgments")
    def record_judgment(study_id: str, request: JudgmentRequest) -> JSONResponse:
        try:
            judgment = store.record_judgment(
                study_id,
                request.item_id,
                request.annotator_id,
                request.choice,
                request.reason,
            )
        except DuplicateJudgmentError as exc:
            return _error(409, exc)
        except (UnknownStudyError, UnknownItemError, UnknownAnnotatorError) as exc:
            return _error(404, exc)
        except StudyError as exc:
            return _error(400, exc)
        return JSONResponse(status_code=201, content=judgment.to_dict())

    @app.get("/study/v1/studies/{study_id}/aggregate")
    def aggregate(study_id: str) -> JSONResponse:
        try:
            return JSONResponse(content=store.aggregate(study_id))
        except UnknownStudyError as exc:
            return _error(404, exc)
        except StudyError as exc:
            return _error(400, exc)

    @app.get("/study/v1/studies/{study_id}/progress")
    def progress(study_id: str) -> JSONResponse:
        try:
            return JSONResponse(content=store.progress(study_id))
        except UnknownStudyError as exc:
            return _error(404, exc)

    if media_root is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/study/media", StaticFiles(directory=str(media_root)), name="media")
    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app


def serve_study(app: FastAPI, host: str = "127.0.0.1", port: int = 8600) -> None:
    """Run the study app under uvicorn until interrupted."""
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="warning")
