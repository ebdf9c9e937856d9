"""Document-specific annotations: label normalization, schema induction,
and turning key-value pairs into reviewable records.

The product of the pipeline is an annotation: the value region's box,
labeled not with the generic "value" but with a normalized form of its
key's text (``"Fax Number:"`` -> ``fax_number``). The project-wide schema
is induced by grouping key texts under their normalized form; merging is
exact-match only — fuzzy merges silently change label semantics.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

from .classify import TokenPrediction
from .linker import LinkResult
from .model import BBox, Document, Entity

_TRAILING_PUNCT = ":#-."
_NON_ALNUM_RUN = re.compile(r"[^0-9a-z]+")


def normalize_label(raw_key_text: str) -> str:
    """Normalize a raw key text into a stable label id.

    Trim, strip trailing ``: # - .`` punctuation, lowercase, replace runs of
    non-alphanumerics with ``_``, strip edge underscores. Idempotent.
    Raises ValueError when nothing labelable remains.
    """
    s = raw_key_text.strip()
    while s and s[-1] in _TRAILING_PUNCT:
        s = s[:-1].rstrip()
    s = _NON_ALNUM_RUN.sub("_", s.lower()).strip("_")
    if not s:
        raise ValueError(f"unlabelable key: {raw_key_text!r}")
    return s


@dataclass(frozen=True)
class SchemaLabel:
    """One induced label: id, preferred display text, raw variants, count."""

    label_id: str
    display: str
    raw_variants: tuple[str, ...]
    count: int


@dataclass(frozen=True)
class LabelSchema:
    """Project-wide set of document-specific labels induced from key texts."""

    labels: tuple[SchemaLabel, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        ids = [lab.label_id for lab in self.labels]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate label ids in schema")

    def label_ids(self) -> set[str]:
        return {lab.label_id for lab in self.labels}

    def __contains__(self, label_id: str) -> bool:
        return any(lab.label_id == label_id for lab in self.labels)

    def to_dict(self) -> dict:
        return {
            "labels": [
                {
                    "label_id": lab.label_id,
                    "display": lab.display,
                    "raw_variants": sorted(lab.raw_variants),
                    "count": lab.count,
                }
                for lab in self.labels
            ]
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "LabelSchema":
        return cls(
            labels=tuple(
                SchemaLabel(
                    label_id=item["label_id"],
                    display=item["display"],
                    raw_variants=tuple(item["raw_variants"]),
                    count=int(item["count"]),
                )
                for item in data.get("labels", [])
            )
        )


def induce_schema(
    per_document: Mapping[str, tuple[Sequence[Entity], LinkResult]]
) -> LabelSchema:
    """Group linked key texts project-wide by their normalized form.

    ``per_document`` maps doc id to (entities, link result). The display
    text of a label is its most frequent raw variant (ties: lexicographically
    smallest); count is the number of pairs contributing to it. Zero pairs
    across the project give an empty schema.
    """
    variants: dict[str, dict[str, int]] = {}
    for doc_id in sorted(per_document):
        entities, result = per_document[doc_id]
        by_id = {e.entity_id: e for e in entities}
        for key_id, _value_id in result.pairs:
            raw = by_id[key_id].text
            label_id = normalize_label(raw)
            variants.setdefault(label_id, {})
            variants[label_id][raw] = variants[label_id].get(raw, 0) + 1

    labels = []
    for label_id in sorted(variants):
        counts = variants[label_id]
        display = min(counts, key=lambda raw: (-counts[raw], raw))
        labels.append(
            SchemaLabel(
                label_id=label_id,
                display=display,
                raw_variants=tuple(sorted(counts)),
                count=sum(counts.values()),
            )
        )
    return LabelSchema(labels=tuple(labels))


class AnnotationStatus(str, Enum):
    AUTO = "auto"
    ACCEPTED = "accepted"
    EDITED = "edited"
    REJECTED = "rejected"


@dataclass(frozen=True)
class AnnotationRecord:
    """One reviewable annotation: a value region carrying a specific label."""

    annotation_id: str
    label_id: str
    value_text: str
    value_box: BBox
    source_key_entity: int | None
    source_value_entity: int | None
    confidence: float
    status: AnnotationStatus = AnnotationStatus.AUTO

    def __post_init__(self):
        if not self.annotation_id:
            raise ValueError("annotation_id must be non-empty")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0,1]")

    def to_dict(self) -> dict:
        record = {
            "id": self.annotation_id,
            "label": self.label_id,
            "text": self.value_text,
            "box": self.value_box.as_list(),
            "status": self.status.value,
            "confidence": self.confidence,
        }
        record["source"] = {
            "key_entity": self.source_key_entity,
            "value_entity": self.source_value_entity,
        }
        return record

    @classmethod
    def from_dict(cls, data: Mapping) -> "AnnotationRecord":
        source = data.get("source", {})
        return cls(
            annotation_id=data["id"],
            label_id=data["label"],
            value_text=data["text"],
            value_box=BBox.from_list(data["box"]),
            source_key_entity=source.get("key_entity"),
            source_value_entity=source.get("value_entity"),
            confidence=float(data["confidence"]),
            status=AnnotationStatus(data["status"]),
        )


def generate_annotations(
    document: Document,
    entities: Sequence[Entity],
    link_result: LinkResult,
    schema: LabelSchema,
    predictions: Sequence[TokenPrediction],
) -> list[AnnotationRecord]:
    """One auto-status record per linked pair.

    Record confidence is the minimum classifier confidence over the value
    entity's tokens — a conservative signal for the review queue.
    """
    by_id = {e.entity_id: e for e in entities}
    pred_by_index = {p.token_index: p for p in predictions}

    missing = set()
    for key_id, _ in link_result.pairs:
        label_id = normalize_label(by_id[key_id].text)
        if label_id not in schema:
            missing.add(label_id)
    if missing:
        raise ValueError(f"schema is missing labels: {sorted(missing)}")

    records = []
    for n, (key_id, value_id) in enumerate(link_result.pairs):
        key, value = by_id[key_id], by_id[value_id]
        confidence = min(
            pred_by_index[idx].top_confidence for idx in value.token_indices
        )
        records.append(
            AnnotationRecord(
                annotation_id=f"{document.doc_id}-a{n}",
                label_id=normalize_label(key.text),
                value_text=value.text,
                value_box=value.box,
                source_key_entity=key_id,
                source_value_entity=value_id,
                confidence=confidence,
                status=AnnotationStatus.AUTO,
            )
        )
    return records
