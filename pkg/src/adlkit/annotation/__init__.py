from .export import export_lines, parse_export
from .service import create_app
from .store import AnnotationRecord, AnnotationStore, ImageRef, InMemoryStore, SqliteStore

__all__ = [
    "AnnotationRecord",
    "AnnotationStore",
    "ImageRef",
    "InMemoryStore",
    "SqliteStore",
    "create_app",
    "export_lines",
    "parse_export",
]
