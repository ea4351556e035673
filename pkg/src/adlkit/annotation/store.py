"""Storage backends for the annotation service.

The store keeps image metadata, per-image annotations (label + tags), and
access grants. Mutations are atomic per record; concurrent label writes
resolve last-write-wins in server receipt order. Two implementations:
an in-memory store for tests and an embedded sqlite store for serving.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator

from ..taxonomy import ActivityLabel, label_from_name


@dataclass(frozen=True)
class ImageRef:
    """Metadata for one image in an owner's collection."""

    image_id: str
    owner_user_id: str
    timestamp: datetime
    thumbnail: str | None = None


@dataclass(frozen=True)
class AnnotationRecord:
    """Current label and tags of one image, with audit fields."""

    image_id: str
    owner_user_id: str
    label: ActivityLabel | None
    tags: frozenset[str]
    updated_at: datetime | None
    updated_by: str | None


def _empty_annotation(image: ImageRef) -> AnnotationRecord:
    return AnnotationRecord(
        image_id=image.image_id,
        owner_user_id=image.owner_user_id,
        label=None,
        tags=frozenset(),
        updated_at=None,
        updated_by=None,
    )


class AnnotationStore(ABC):
    """Persistence interface; all methods must be safe for concurrent use."""

    @abstractmethod
    def register_images(self, images: list[ImageRef]) -> None: ...

    @abstractmethod
    def owner_exists(self, owner: str) -> bool: ...

    @abstractmethod
    def get_image(self, image_id: str) -> ImageRef | None: ...

    @abstractmethod
    def list_images(self, owner: str, page: int, page_size: int) -> tuple[list[ImageRef], int]:
        """One page of the owner's images in (timestamp, image_id) order."""

    @abstractmethod
    def get_annotation(self, image_id: str) -> AnnotationRecord | None: ...

    @abstractmethod
    def set_label(
        self, image_id: str, label: ActivityLabel, updated_by: str
    ) -> AnnotationRecord: ...

    @abstractmethod
    def add_tag(self, image_id: str, tag: str, updated_by: str) -> AnnotationRecord: ...

    @abstractmethod
    def remove_tag(self, image_id: str, tag: str, updated_by: str) -> AnnotationRecord: ...

    @abstractmethod
    def grant(self, owner: str, annotator: str) -> None: ...

    @abstractmethod
    def revoke(self, owner: str, annotator: str) -> None: ...

    @abstractmethod
    def has_grant(self, owner: str, annotator: str) -> bool: ...

    @abstractmethod
    def annotations_for_owner(self, owner: str) -> Iterator[tuple[ImageRef, AnnotationRecord]]:
        """All images of an owner, in (timestamp, image_id) order."""


class InMemoryStore(AnnotationStore):
    """Dict-backed store; mutations serialize on one lock."""

    def __init__(self) -> None:
        self._lock = threading.RLock()
        self._images: dict[str, ImageRef] = {}
        self._annotations: dict[str, AnnotationRecord] = {}
        self._owners: set[str] = set()
        self._grants: set[tuple[str, str]] = set()

    def register_images(self, images: list[ImageRef]) -> None:
        with self._lock:
            for image in images:
                if image.image_id in self._images:
                    raise ValueError(f"image {image.image_id!r} already registered")
            for image in images:
                self._images[image.image_id] = image
                self._annotations[image.image_id] = _empty_annotation(image)
                self._owners.add(image.owner_user_id)

    def owner_exists(self, owner: str) -> bool:
        with self._lock:
            return owner in self._owners

    def get_image(self, image_id: str) -> ImageRef | None:
        with self._lock:
            return self._images.get(image_id)

    def list_images(self, owner: str, page: int, page_size: int) -> tuple[list[ImageRef], int]:
        with self._lock:
            mine = sorted(
                (img for img in self._images.values() if img.owner_user_id == owner),
                key=lambda img: (img.timestamp, img.image_id),
            )
        start = (page - 1) * page_size
        return mine[start : start + page_size], len(mine)

    def get_annotation(self, image_id: str) -> AnnotationRecord | None:
        with self._lock:
            return self._annotations.get(image_id)

    def _mutate(self, image_id: str, **changes) -> AnnotationRecord:
        record = self._annotations.get(image_id)
        if record is None:
            raise KeyError(image_id)
        updated = replace(record, **changes, updated_at=datetime.now(timezone.utc))
        self._annotations[image_id] = updated
        return updated

    def set_label(self, image_id: str, label: ActivityLabel, updated_by: str) -> AnnotationRecord:
        with self._lock:
            return self._mutate(image_id, label=label, updated_by=updated_by)

    def add_tag(self, image_id: str, tag: str, updated_by: str) -> AnnotationRecord:
        with self._lock:
            record = self._annotations.get(image_id)
            if record is None:
                raise KeyError(image_id)
            return self._mutate(image_id, tags=record.tags | {tag}, updated_by=updated_by)

    def remove_tag(self, image_id: str, tag: str, updated_by: str) -> AnnotationRecord:
        with self._lock:
            record = self._annotations.get(image_id)
            if record is None:
                raise KeyError(image_id)
            return self._mutate(image_id, tags=record.tags - {tag}, updated_by=updated_by)

    def grant(self, owner: str, annotator: str) -> None:
        with self._lock:
            self._grants.add((owner, annotator))

    def revoke(self, owner: str, annotator: str) -> None:
        with self._lock:
            self._grants.discard((owner, annotator))

    def has_grant(self, owner: str, annotator: str) -> bool:
        with self._lock:
            return (owner, annotator) in self._grants

    def annotations_for_owner(self, owner: str) -> Iterator[tuple[ImageRef, AnnotationRecord]]:
        with self._lock:
            mine = sorted(
                (img for img in self._images.values() if img.owner_user_id == owner),
                key=lambda img: (img.timestamp, img.image_id),
            )
            pairs = [(img, self._annotations[img.image_id]) for img in mine]
        yield from pairs


_SCHEMA = """
CREATE TABLE IF NOT EXISTS images (
    image_id TEXT PRIMARY KEY,
    owner TEXT NOT NULL,
    timestamp TEXT NOT NULL,
    thumbnail TEXT
);
CREATE INDEX IF NOT EXISTS idx_images_owner ON images(owner, timestamp, image_id);
CREATE TABLE IF NOT EXISTS annotations (
    image_id TEXT PRIMARY KEY REFERENCES images(image_id),
    label TEXT,
    tags TEXT NOT NULL DEFAULT '[]',
    updated_at TEXT,
    updated_by TEXT
);
CREATE TABLE IF NOT EXISTS grants (
    owner TEXT NOT NULL,
    annotator TEXT NOT NULL,
    PRIMARY KEY (owner, annotator)
);
"""


class SqliteStore(AnnotationStore):
    """Embedded sqlite store; one connection guarded by a lock."""

    def __init__(self, path: str | Path) -> None:
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(str(path), check_same_thread=False)
        self._conn.execute("PRAGMA journal_mode=WAL")
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    def register_images(self, images: list[ImageRef]) -> None:
        with self._lock, self._conn:
            for image in images:
                row = self._conn.execute(
                    "SELECT 1 FROM images WHERE image_id = ?", (image.image_id,)
                ).fetchone()
                if row is not None:
                    raise ValueError(f"image {image.image_id!r} already registered")
            self._conn.executemany(
                "INSERT INTO images (image_id, owner, timestamp, thumbnail) VALUES (?,?,?,?)",
                [
                    (img.image_id, img.owner_user_id, img.timestamp.isoformat(), img.thumbnail)
                    for img in images
                ],
            )
            self._conn.executemany(
                "INSERT INTO annotations (image_id, label, tags) VALUES (?, NULL, '[]')",
                [(img.image_id,) for img in images],
            )

    def owner_exists(self, owner: str) -> bool:
        with self._lock:
            row = self._conn.execute(
                "SELECT 1 FROM images WHERE owner = ? LIMIT 1", (owner,)
            ).fetchone()
        return row is not None

    @staticmethod
    def _image_from_row(row: tuple) -> ImageRef:
        return ImageRef(
            image_id=row[0],
            owner_user_id=row[1],
            timestamp=datetime.fromisoformat(row[2]),
            thumbnail=row[3],
        )

    def get_image(self, image_id: str) -> ImageRef | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT image_id, owner, timestamp, thumbnail FROM images WHERE image_id = ?",
                (image_id,),
            ).fetchone()
        return self._image_from_row(row) if row else None

    def list_images(self, owner: str, page: int, page_size: int) -> tuple[list[ImageRef], int]:
        with self._lock:
            total = self._conn.execute(
                "SELECT COUNT(*) FROM images WHERE owner = ?", (owner,)
            ).fetchone()[0]
            rows = self._conn.execute(
                "SELECT image_id, owner, timestamp, thumbnail FROM images "
                "WHERE owner = ? ORDER BY timestamp, image_id LIMIT ? OFFSET ?",
                (owner, page_size, (page - 1) * page_size),
            ).fetchall()
        return [self._image_from_row(r) for r in rows], int(total)

    def _annotation_from_rows(self, image: ImageRef, row: tuple) -> AnnotationRecord:
        label_name, tags_json, updated_at, updated_by = row
        return AnnotationRecord(
            image_id=image.image_id,
            owner_user_id=image.owner_user_id,
            label=label_from_name(label_name, normalize=False) if label_name else None,
            tags=frozenset(json.loads(tags_json)),
            updated_at=datetime.fromisoformat(updated_at) if updated_at else None,
            updated_by=updated_by,
        )

    def get_annotation(self, image_id: str) -> AnnotationRecord | None:
        image = self.get_image(image_id)
        if image is None:
            return None
        with self._lock:
            row = self._conn.execute(
                "SELECT label, tags, updated_at, updated_by FROM annotations WHERE image_id = ?",
                (image_id,),
            ).fetchone()
        return self._annotation_from_rows(image, row) if row else None

    def set_label(self, image_id: str, label: ActivityLabel, updated_by: str) -> AnnotationRecord:
        with self._lock, self._conn:
            image = self.get_image(image_id)
            if image is None:
                raise KeyError(image_id)
            self._conn.execute(
                "UPDATE annotations SET label = ?, updated_at = ?, updated_by = ? "
                "WHERE image_id = ?",
                (label.name, datetime.now(timezone.utc).isoformat(), updated_by, image_id),
            )
        return self.get_annotation(image_id)  # type: ignore[return-value]

    def _update_tags(self, image_id: str, tag: str, add: bool, updated_by: str) -> AnnotationRecord:
        with self._lock, self._conn:
            image = self.get_image(image_id)
            if image is None:
                raise KeyError(image_id)
            row = self._conn.execute(
                "SELECT tags FROM annotations WHERE image_id = ?", (image_id,)
            ).fetchone()
            tags = set(json.loads(row[0]))
            tags = tags | {tag} if add else tags - {tag}
            self._conn.execute(
                "UPDATE annotations SET tags = ?, updated_at = ?, updated_by = ? "
                "WHERE image_id = ?",
                (
                    json.dumps(sorted(tags)),
                    datetime.now(timezone.utc).isoformat(),
                    updated_by,
                    image_id,
                ),
            )
        return self.get_annotation(image_id)  # type: ignore[return-value]

    def add_tag(self, image_id: str, tag: str, updated_by: str) -> AnnotationRecord:
        return self._update_tags(image_id, tag, True, updated_by)

    def remove_tag(self, image_id: str, tag: str, updated_by: str) -> AnnotationRecord:
        return self._update_tags(image_id, tag, False, updated_by)

    def grant(self, owner: str, annotator: str) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT OR IGNORE INTO grants (owner, annotator) VALUES (?, ?)",
                (owner, annotator),
            )

    def revoke(self, owner: str, annotator: str) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "DELETE FROM grants WHERE owner = ? AND annotator = ?", (owner, annotator)
            )

    def has_grant(self, owner: str, annotator: str) -> bool:
        with self._lock:
            row = self._conn.execute(
                "SELECT 1 FROM grants WHERE owner = ? AND annotator = ?",
                (owner, annotator),
            ).fetchone()
        return row is not None

    def annotations_for_owner(self, owner: str) -> Iterator[tuple[ImageRef, AnnotationRecord]]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT i.image_id, i.owner, i.timestamp, i.thumbnail, "
                "       a.label, a.tags, a.updated_at, a.updated_by "
                "FROM images i JOIN annotations a ON a.image_id = i.image_id "
                "WHERE i.owner = ? ORDER BY i.timestamp, i.image_id",
                (owner,),
            ).fetchall()
        for row in rows:
            image = self._image_from_row(row[:4])
            yield image, self._annotation_from_rows(image, row[4:])
