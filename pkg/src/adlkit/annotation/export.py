"""Export labeled annotations in the shared feature-record line format.

Exported lines carry an empty ``features`` map plus an extra ``tags``
field; they parse with the standard record loader, which ignores unknown
keys.
"""

from __future__ import annotations

import json
from typing import Iterator

from .store import AnnotationStore


def export_lines(
    store: AnnotationStore, owner: str, *, include_unlabeled: bool = False
) -> Iterator[str]:
    """Yield one JSON line per image; unlabeled images are skipped unless asked."""
    for image, annotation in store.annotations_for_owner(owner):
        if annotation.label is None and not include_unlabeled:
            continue
        yield json.dumps(
            {
                "image_id": image.image_id,
                "user_id": image.owner_user_id,
                "timestamp": image.timestamp.isoformat(),
                "backbone": "annotation",
                "label": annotation.label.name if annotation.label else None,
                "features": {},
                "tags": sorted(annotation.tags),
            },
            separators=(",", ":"),
        )


def parse_export(lines) -> list[tuple[str, str | None, frozenset[str]]]:
    """Read (image_id, label name, tags) triples back from exported lines."""
    out = []
    for line in lines:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        if not line.strip():
            continue
        obj = json.loads(line)
        out.append(
            (obj["image_id"], obj.get("label"), frozenset(obj.get("tags", ())))
        )
    return out
