"""Uncertainty scoring, review queue ranking, and training exports.

Documents are ranked by how unsure the token classifier was, so reviewer
time goes where it pays off most. Once every annotation on a document has
been reviewed, the document becomes eligible for the next training
iteration; each iteration exports a disjoint set of documents, and
rejected annotations are left out of the training files.
"""

from __future__ import annotations

import json
import math
from datetime import datetime, timezone
from typing import AbstractSet, Mapping, Sequence

from .annotate import AnnotationStatus
from .classify import TokenPrediction
from .errors import EmptyIterationError, StoreError
from .ingest import export_funsd
from .model import Document, Entity, GenericLabel, Token
from .review import AnnotationState


def token_entropy(confidence: Mapping) -> float:
    """Shannon entropy (nats) of one token's label distribution."""
    total = 0.0
    entropy = 0.0
    for p in confidence.values():
        p = float(p)
        if p < 0:
            raise ValueError(f"negative probability {p}")
        total += p
        if p > 0:
            entropy -= p * math.log(p)
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"probabilities sum to {total}, not 1")
    return entropy


def token_margin(confidence: Mapping) -> float:
    """Gap between the best and second-best label probability."""
    values = sorted((float(p) for p in confidence.values()), reverse=True)
    if len(values) < 2:
        raise ValueError("margin needs at least two labels")
    return values[0] - values[1]


def doc_uncertainty(
    predictions: Sequence[TokenPrediction], strategy: str = "mean_entropy"
) -> float:
    """Score a document's predictions; higher means less certain.

    ``mean_entropy`` averages per-token entropy; ``min_margin`` is one
    minus the smallest top-two margin.
    """
    if not predictions:
        raise ValueError("cannot score a document with no predictions")
    if strategy == "mean_entropy":
        return sum(token_entropy(p.confidence) for p in predictions) / len(predictions)
    if strategy == "min_margin":
        return 1.0 - min(token_margin(p.confidence) for p in predictions)
    raise ValueError(f"unknown uncertainty strategy {strategy!r}")


def select_batch(
    scores: Mapping[str, float], k: int, exclude: AbstractSet[str] = frozenset()
) -> list[str]:
    """Top-k document ids by descending score, skipping excluded docs.

    Ties go to the smaller doc id; fewer than k available means all of
    them. k must be at least 1.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    ranked = sorted(
        (item for item in scores.items() if item[0] not in exclude),
        key=lambda item: (-item[1], item[0]),
    )
    return [doc_id for doc_id, _ in ranked[:k]]


# --- review progress -------------------------------------------------------


def review_counts(state: AnnotationState) -> dict[str, int]:
    counts = {status.value: 0 for status in AnnotationStatus}
    for record in state.values():
        counts[record.status.value] += 1
    counts["total"] = len(state)
    return counts


def is_fully_reviewed(state: AnnotationState) -> bool:
    """True when there is something to train on and no pending autos."""
    counts = review_counts(state)
    return counts["total"] >= 1 and counts["auto"] == 0


def queue_candidates(store) -> list[str]:
    """Docs still worth a reviewer's attention: bootstrapped, not yet
    exported, and either carrying pending autos or empty of annotations."""
    exported = store.exported_doc_ids()
    out = []
    for doc_id in store.list_docs():
        if doc_id in exported or not store.has_annotations(doc_id):
            continue
        if not is_fully_reviewed(store.doc_annotations(doc_id)):
            out.append(doc_id)
    return out


def ranked_queue(store, k: int | None = None, strategy: str | None = None) -> list[dict]:
    """Queue entries sorted most-uncertain-first, each with its score."""
    strategy = strategy or store.config().uncertainty
    candidates = queue_candidates(store)
    scores = {}
    for doc_id in candidates:
        _, _, predictions, _ = store.load_entities(doc_id)
        scores[doc_id] = doc_uncertainty(predictions, strategy) if predictions else 0.0
    if not scores:
        return []
    order = select_batch(scores, k if k is not None else len(scores))
    entries = []
    for doc_id in order:
        counts = review_counts(store.doc_annotations(doc_id))
        entries.append({"doc_id": doc_id, "score": scores[doc_id], "counts": counts})
    return entries


# --- iteration export ------------------------------------------------------


def _export_doc(document: Document, entities, state: AnnotationState) -> str:
    """Build one training file from a reviewed document."""
    surviving = [
        r
        for r in sorted(state.values(), key=lambda r: r.annotation_id)
        if r.status in (AnnotationStatus.ACCEPTED, AnnotationStatus.EDITED)
    ]

    export_entities = list(entities)
    next_id = max((e.entity_id for e in export_entities), default=-1) + 1
    tokens = list(document.tokens)

    specific_labels: dict[int, str] = {}
    boxes: dict[int, object] = {}
    texts: dict[int, str] = {}
    links: list[tuple[int, int]] = []

    for record in surviving:
        value_id = record.source_value_entity
        if value_id is None:
            # Reviewer-added pair with no detected entity behind it: write a
            # synthetic one-word answer so the training file keeps it.
            synthetic = Token(
                index=len(tokens), text=record.value_text, box=record.value_box
            )
            tokens.append(synthetic)
            value_id = next_id
            next_id += 1
            export_entities.append(
                Entity.from_tokens(value_id, GenericLabel.VALUE, [synthetic])
            )
        specific_labels[value_id] = record.label_id
        boxes[value_id] = record.value_box
        texts[value_id] = record.value_text
        if record.source_key_entity is not None:
            links.append((record.source_key_entity, value_id))

    # Tokens outside every entity become one-word filler entries so the
    # file covers the whole page.
    covered = {i for e in export_entities for i in e.token_indices}
    for tok in tokens:
        if tok.index not in covered:
            export_entities.append(
                Entity.from_tokens(next_id, GenericLabel.OTHER, [tok])
            )
            next_id += 1

    export_document = Document(
        doc_id=document.doc_id, page=document.page, tokens=tuple(tokens)
    )
    return export_funsd(
        export_document,
        export_entities,
        links,
        specific_labels=specific_labels,
        annotation_boxes=boxes,
        annotation_texts=texts,
    )


def build_iteration(store) -> tuple[int, dict]:
    """Export every fully reviewed, not-yet-exported document.

    Returns (iteration number, manifest). Raises EmptyIterationError when
    nothing qualifies, so empty iteration directories never appear.
    """
    exported = store.exported_doc_ids()
    eligible: list[tuple[str, AnnotationState]] = []
    for doc_id in store.list_docs():
        if doc_id in exported or not store.has_annotations(doc_id):
            continue
        state = store.doc_annotations(doc_id)
        if is_fully_reviewed(state):
            eligible.append((doc_id, state))

    if not eligible:
        raise EmptyIterationError("no fully reviewed documents to export")

    number = store.next_iteration_number()
    files: dict[str, str] = {}
    counts = {"accepted": 0, "edited": 0, "rejected": 0}
    doc_ids = []
    for doc_id, state in eligible:
        document = store.load_document(doc_id)
        entities, _, _, _ = store.load_entities(doc_id)
        try:
            files[f"docs/{doc_id}.json"] = _export_doc(document, entities, state)
        except ValueError as err:
            raise StoreError(f"cannot export {doc_id}: {err}") from err
        for record in state.values():
            if record.status.value in counts:
                counts[record.status.value] += 1
        doc_ids.append(doc_id)

    manifest = {
        "iteration": number,
        "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "export_path": f"iterations/{number}/docs",
        "doc_ids": sorted(doc_ids),
        "files": {doc_id: f"docs/{doc_id}.json" for doc_id in sorted(doc_ids)},
        "counts": dict(counts, docs=len(doc_ids)),
    }
    store.write_iteration(number, manifest, files)

    # Score report next to the manifest, both human- and machine-readable.
    from .metrics import format_report, project_scores

    scores = project_scores(store)
    target = store.iteration_dir(number)
    (target / "metrics.json").write_text(
        json.dumps(scores, ensure_ascii=False, indent=1) + "\n", encoding="utf-8"
    )
    (target / "metrics.txt").write_text(format_report(scores) + "\n", encoding="utf-8")
    return number, manifest
