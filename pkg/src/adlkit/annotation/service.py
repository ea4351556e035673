"""HTTP API of the annotation service.

Authentication is token-based: POST /sessions exchanges the service secret
plus a user id for a bearer token. A requester may view or annotate a
collection only when they own it, hold a grant from its owner, or are an
admin; everything else is access-denied, so one user's pictures stay
private from every other user.
"""

from __future__ import annotations

import secrets
import threading
from datetime import datetime
from pathlib import Path

from fastapi import Depends, FastAPI, Header, HTTPException, Query
from fastapi.responses import FileResponse, PlainTextResponse
from pydantic import BaseModel

from ..taxonomy import ACTIVITIES, TaxonomyError, label_from_name
from .export import export_lines
from .store import AnnotationRecord, AnnotationStore, ImageRef


class SessionBody(BaseModel):
    user_id: str


class LabelBody(BaseModel):
    label: str


class TagBody(BaseModel):
    tag: str


class ImageItem(BaseModel):
    image_id: str
    timestamp: datetime
    thumbnail: str | None = None


def _annotation_json(record: AnnotationRecord) -> dict:
    return {
        "image_id": record.image_id,
        "owner_user_id": record.owner_user_id,
        "label": record.label.name if record.label else None,
        "tags": sorted(record.tags),
        "updated_at": record.updated_at.isoformat() if record.updated_at else None,
        "updated_by": record.updated_by,
    }


def _image_json(image: ImageRef, record: AnnotationRecord | None) -> dict:
    out = {
        "image_id": image.image_id,
        "owner_user_id": image.owner_user_id,
        "timestamp": image.timestamp.isoformat(),
        "thumbnail": image.thumbnail,
    }
    if record is not None:
        out["label"] = record.label.name if record.label else None
        out["tags"] = sorted(record.tags)
    return out


def create_app(
    store: AnnotationStore,
    *,
    service_secret: str,
    admin_users: tuple[str, ...] = (),
    blob_root: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="adlkit annotation service")
    sessions: dict[str, str] = {}
    sessions_lock = threading.Lock()
    admins = set(admin_users)
    blob_base = Path(blob_root).resolve() if blob_root else None

    def current_user(authorization: str | None = Header(default=None)) -> str:
        if not authorization or not authorization.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token")
        token = authorization.removeprefix("Bearer ").strip()
        with sessions_lock:
            user = sessions.get(token)
        if user is None:
            raise HTTPException(status_code=401, detail="invalid session token")
        return user

    def can_view(requester: str, owner: str) -> bool:
        return requester == owner or requester in admins or store.has_grant(owner, requester)

    def require_view(requester: str, owner: str) -> None:
        if not can_view(requester, owner):
            raise HTTPException(status_code=403, detail="access denied")

    def require_owner_or_admin(requester: str, owner: str) -> None:
        if requester != owner and requester not in admins:
            raise HTTPException(status_code=403, detail="access denied")

    def visible_image(image_id: str, requester: str) -> ImageRef:
        image = store.get_image(image_id)
        if image is None:
            raise HTTPException(status_code=404, detail="unknown image")
        require_view(requester, image.owner_user_id)
        return image

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ready"}

    @app.get("/taxonomy")
    def taxonomy() -> list[dict]:
        return [{"name": a.name, "index": a.index} for a in ACTIVITIES]

    @app.post("/sessions")
    def create_session(
        body: SessionBody, x_service_secret: str | None = Header(default=None)
    ) -> dict:
        if x_service_secret != service_secret:
            raise HTTPException(status_code=401, detail="bad service secret")
        token = secrets.token_hex(16)
        with sessions_lock:
            sessions[token] = body.user_id
        return {"token": token, "user_id": body.user_id}

    @app.get("/collections/{owner}/images")
    def list_images(
        owner: str,
        page: int = Query(default=1, ge=1),
        size: int = Query(default=50, ge=1, le=500),
        requester: str = Depends(current_user),
    ) -> dict:
        require_view(requester, owner)
        if not store.owner_exists(owner) and requester != owner:
            raise HTTPException(status_code=404, detail="unknown owner")
        items, total = store.list_images(owner, page, size)
        return {
            "items": [_image_json(img, store.get_annotation(img.image_id)) for img in items],
            "total": total,
            "page": page,
            "size": size,
        }

    @app.post("/collections/{owner}/images", status_code=201)
    def register_images(
        owner: str, items: list[ImageItem], requester: str = Depends(current_user)
    ) -> dict:
        require_owner_or_admin(requester, owner)
        refs = []
        for item in items:
            if item.timestamp.tzinfo is None:
                raise HTTPException(
                    status_code=400, detail=f"{item.image_id}: timestamp lacks a timezone"
                )
            refs.append(
                ImageRef(
                    image_id=item.image_id,
                    owner_user_id=owner,
                    timestamp=item.timestamp,
                    thumbnail=item.thumbnail,
                )
            )
        try:
            store.register_images(refs)
        except ValueError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"registered": len(refs)}

    @app.put("/collections/{owner}/grants/{annotator}")
    def add_grant(
        owner: str, annotator: str, requester: str = Depends(current_user)
    ) -> dict:
        require_owner_or_admin(requester, owner)
        store.grant(owner, annotator)
        return {"owner": owner, "annotator": annotator, "granted": True}

    @app.delete("/collections/{owner}/grants/{annotator}")
    def remove_grant(
        owner: str, annotator: str, requester: str = Depends(current_user)
    ) -> dict:
        require_owner_or_admin(requester, owner)
        store.revoke(owner, annotator)
        return {"owner": owner, "annotator": annotator, "granted": False}

    @app.get("/images/{image_id}/annotation")
    def get_annotation(image_id: str, requester: str = Depends(current_user)) -> dict:
        visible_image(image_id, requester)
        record = store.get_annotation(image_id)
        assert record is not None
        return _annotation_json(record)

    @app.put("/images/{image_id}/label")
    def set_label(
        image_id: str, body: LabelBody, requester: str = Depends(current_user)
    ) -> dict:
        visible_image(image_id, requester)
        try:
            label = label_from_name(body.label)
        except TaxonomyError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return _annotation_json(store.set_label(image_id, label, requester))

    @app.post("/images/{image_id}/tags")
    def add_tag(
        image_id: str, body: TagBody, requester: str = Depends(current_user)
    ) -> dict:
        visible_image(image_id, requester)
        tag = body.tag.strip()
        if not tag:
            raise HTTPException(status_code=400, detail="tag must be non-empty")
        return _annotation_json(store.add_tag(image_id, tag, requester))

    @app.delete("/images/{image_id}/tags/{tag}")
    def remove_tag(
        image_id: str, tag: str, requester: str = Depends(current_user)
    ) -> dict:
        visible_image(image_id, requester)
        return _annotation_json(store.remove_tag(image_id, tag.strip(), requester))

    @app.get("/images/{image_id}/thumbnail")
    def thumbnail(image_id: str, requester: str = Depends(current_user)):
        image = visible_image(image_id, requester)
        if blob_base is None or image.thumbnail is None:
            raise HTTPException(status_code=404, detail="no thumbnail available")
        path = (blob_base / image.owner_user_id / image.thumbnail).resolve()
        if not path.is_relative_to(blob_base) or not path.is_file():
            raise HTTPException(status_code=404, detail="no thumbnail available")
        return FileResponse(path)

    @app.get("/export/{owner}")
    def export(
        owner: str,
        format: str = Query(default="jsonl"),
        include_unlabeled: bool = Query(default=False),
        requester: str = Depends(current_user),
    ) -> PlainTextResponse:
        require_owner_or_admin(requester, owner)
        if format != "jsonl":
            raise HTTPException(status_code=400, detail=f"unsupported format {format!r}")
        body = "".join(
            line + "\n"
            for line in export_lines(store, owner, include_unlabeled=include_unlabeled)
        )
        return PlainTextResponse(body, media_type="application/x-ndjson")

    return app
