"""formloop: bootstrap document-specific form annotations and refine them
with human review.

The pipeline: OCR tokens come in (TSV or FUNSD-style JSON), a token
classifier marks keys and values, geometric linking pairs them, key texts
induce a per-project label schema, and the pairs become reviewable
annotations. A small HTTP service records accept/edit/reject decisions in
an append-only audit log, and reviewed documents export as training data
for the next model iteration.
"""

__version__ = "0.1.0"

from .annotate import (
    AnnotationRecord,
    AnnotationStatus,
    LabelSchema,
    SchemaLabel,
    generate_annotations,
    induce_schema,
    normalize_label,
)
from .classify import ClassifierKind, TokenPrediction, aggregate_entities, classify
from .config import ProjectConfig
from .errors import FormloopError
from .ingest import GoldEntitySet, export_funsd, parse_funsd, parse_ocr_tsv
from .linker import LinkConfig, LinkResult, link
from .model import BBox, Document, Entity, GenericLabel, Page, Token
from .store import ProjectStore

__all__ = [
    "AnnotationRecord",
    "AnnotationStatus",
    "BBox",
    "ClassifierKind",
    "Document",
    "Entity",
    "FormloopError",
    "GenericLabel",
    "GoldEntitySet",
    "LabelSchema",
    "LinkConfig",
    "LinkResult",
    "Page",
    "ProjectConfig",
    "ProjectStore",
    "SchemaLabel",
    "Token",
    "TokenPrediction",
    "aggregate_entities",
    "classify",
    "export_funsd",
    "generate_annotations",
    "induce_schema",
    "link",
    "normalize_label",
    "parse_funsd",
    "parse_ocr_tsv",
    "__version__",
]
