"""On-disk project store.

Layout under the project root::

    project.json                  name, config, induced label schema
    audit.log                     append-only JSONL of review actions
    docs/<doc_id>/ocr.json        page geometry and tokens
    docs/<doc_id>/entities.json   detected entities, links, token predictions
    docs/<doc_id>/baseline.json   annotations exactly as auto-generated
    docs/<doc_id>/annotations.json  materialized current state (derived)
    docs/<doc_id>/gold.json       reference entities/links, when available
    docs/<doc_id>/image.png       page image, when available
    iterations/<n>/               training exports and their manifests

The audit log is the source of truth for review state: a committed action
is first appended and fsynced, and only then is ``annotations.json``
rewritten. Readers never trust the materialized file; they replay
``baseline.json`` plus the log. A crash between append and rewrite
therefore loses nothing, and the stale view heals on the next commit.
"""

from __future__ import annotations

import json
import os
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .annotate import AnnotationRecord, LabelSchema
from .classify import TokenPrediction
from .config import ProjectConfig
from .errors import NotFoundError, StoreError
from .ingest import GoldEntitySet
from .linker import LinkResult
from .model import BBox, Document, Entity, GenericLabel, Page, Token
from .review import AnnotationState, ReviewAction, apply_action, replay

SCHEMA_VERSION = 1


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _dump(data) -> str:
    return json.dumps(data, ensure_ascii=False, indent=1) + "\n"


# --- JSON shapes for the core value types ---------------------------------


def document_to_dict(document: Document) -> dict:
    tokens = []
    for tok in document.tokens:
        entry = {"i": tok.index, "text": tok.text, "box": tok.box.as_list()}
        if tok.ocr_confidence is not None:
            entry["conf"] = tok.ocr_confidence
        tokens.append(entry)
    page = {"width": document.page.width, "height": document.page.height}
    if document.page.image_ref:
        page["image_ref"] = document.page.image_ref
    return {"doc_id": document.doc_id, "page": page, "tokens": tokens}


def document_from_dict(data: dict) -> Document:
    page = Page(
        width=int(data["page"]["width"]),
        height=int(data["page"]["height"]),
        image_ref=data["page"].get("image_ref"),
    )
    tokens = tuple(
        Token(
            index=int(entry["i"]),
            text=entry["text"],
            box=BBox.from_list(entry["box"]),
            ocr_confidence=entry.get("conf"),
        )
        for entry in data["tokens"]
    )
    return Document(doc_id=data["doc_id"], page=page, tokens=tokens)


def entity_to_dict(entity: Entity) -> dict:
    return {
        "id": entity.entity_id,
        "label": entity.label.value,
        "token_indices": list(entity.token_indices),
        "text": entity.text,
        "box": entity.box.as_list(),
    }


def entity_from_dict(data: dict) -> Entity:
    return Entity(
        entity_id=int(data["id"]),
        label=GenericLabel(data["label"]),
        token_indices=tuple(int(i) for i in data["token_indices"]),
        text=data["text"],
        box=BBox.from_list(data["box"]),
    )


def link_result_to_dict(result: LinkResult) -> dict:
    return {
        "pairs": [list(pair) for pair in result.pairs],
        "dropped_values": list(result.dropped_values),
        "unlinked_keys": list(result.unlinked_keys),
    }


def link_result_from_dict(data: dict) -> LinkResult:
    return LinkResult(
        pairs=tuple((int(k), int(v)) for k, v in data["pairs"]),
        dropped_values=tuple(int(i) for i in data["dropped_values"]),
        unlinked_keys=tuple(int(i) for i in data["unlinked_keys"]),
    )


def prediction_to_dict(pred: TokenPrediction) -> dict:
    return {
        "i": pred.token_index,
        "label": pred.label.value,
        "tag": pred.boundary_tag,
        "confidence": {k.value: v for k, v in pred.confidence.items()},
    }


def prediction_from_dict(data: dict) -> TokenPrediction:
    return TokenPrediction(
        token_index=int(data["i"]),
        label=GenericLabel(data["label"]),
        boundary_tag=data["tag"],
        confidence={GenericLabel(k): float(v) for k, v in data["confidence"].items()},
    )


# --- The store itself ------------------------------------------------------


class ProjectStore:
    """Filesystem-backed project state with an event-sourced review log."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self._audit_lock = threading.Lock()
        self._doc_locks: dict[str, threading.Lock] = {}
        self._doc_locks_guard = threading.Lock()

    # -- lifecycle --

    @classmethod
    def init(cls, root: str | Path, name: str, config: ProjectConfig) -> "ProjectStore":
        root = Path(root)
        if (root / "project.json").exists():
            raise StoreError(f"{root} already contains a project")
        root.mkdir(parents=True, exist_ok=True)
        (root / "docs").mkdir(exist_ok=True)
        (root / "iterations").mkdir(exist_ok=True)
        store = cls(root)
        _atomic_write(
            root / "project.json",
            _dump(
                {
                    "name": name,
                    "created": _utc_now(),
                    "schema_version": SCHEMA_VERSION,
                    "config": config.to_dict(),
                    "schema": None,
                }
            ),
        )
        (root / "audit.log").touch()
        return store

    @classmethod
    def open(cls, root: str | Path) -> "ProjectStore":
        root = Path(root)
        if not (root / "project.json").exists():
            raise StoreError(f"{root} is not a project (missing project.json)")
        return cls(root)

    def _project_data(self) -> dict:
        try:
            return json.loads((self.root / "project.json").read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as err:
            raise StoreError(f"cannot read project.json: {err}") from err

    @property
    def name(self) -> str:
        return self._project_data()["name"]

    def config(self) -> ProjectConfig:
        return ProjectConfig.from_dict(self._project_data()["config"])

    def set_config(self, config: ProjectConfig):
        data = self._project_data()
        data["config"] = config.to_dict()
        _atomic_write(self.root / "project.json", _dump(data))

    def schema(self) -> LabelSchema | None:
        raw = self._project_data().get("schema")
        return None if raw is None else LabelSchema.from_dict(raw)

    def set_schema(self, schema: LabelSchema):
        data = self._project_data()
        data["schema"] = schema.to_dict()
        _atomic_write(self.root / "project.json", _dump(data))

    # -- documents --

    def doc_dir(self, doc_id: str) -> Path:
        return self.root / "docs" / doc_id

    def _doc_lock(self, doc_id: str) -> threading.Lock:
        with self._doc_locks_guard:
            return self._doc_locks.setdefault(doc_id, threading.Lock())

    def list_docs(self) -> list[str]:
        docs_dir = self.root / "docs"
        if not docs_dir.exists():
            return []
        return sorted(p.name for p in docs_dir.iterdir() if (p / "ocr.json").exists())

    def has_doc(self, doc_id: str) -> bool:
        return (self.doc_dir(doc_id) / "ocr.json").exists()

    def add_document(self, document: Document, image_path: Path | None = None):
        doc_dir = self.doc_dir(document.doc_id)
        if (doc_dir / "ocr.json").exists():
            raise StoreError(f"document {document.doc_id} already ingested")
        doc_dir.mkdir(parents=True, exist_ok=True)
        if image_path is not None:
            data = Path(image_path).read_bytes()
            target = doc_dir / ("image" + Path(image_path).suffix.lower())
            target.write_bytes(data)
            document = Document(
                doc_id=document.doc_id,
                page=Page(document.page.width, document.page.height, target.name),
                tokens=document.tokens,
            )
        _atomic_write(doc_dir / "ocr.json", _dump(document_to_dict(document)))

    def load_document(self, doc_id: str) -> Document:
        path = self.doc_dir(doc_id) / "ocr.json"
        if not path.exists():
            raise NotFoundError(f"no document {doc_id}")
        return document_from_dict(json.loads(path.read_text(encoding="utf-8")))

    def image_path(self, doc_id: str) -> Path | None:
        document = self.load_document(doc_id)
        if not document.page.image_ref:
            return None
        path = self.doc_dir(doc_id) / document.page.image_ref
        return path if path.exists() else None

    def save_gold(self, doc_id: str, entities: Sequence[Entity], links: Sequence[tuple[int, int]]):
        _atomic_write(
            self.doc_dir(doc_id) / "gold.json",
            _dump(
                {
                    "doc_id": doc_id,
                    "entities": [entity_to_dict(e) for e in entities],
                    "links": [list(pair) for pair in links],
                }
            ),
        )

    def load_gold(self, doc_id: str) -> GoldEntitySet | None:
        path = self.doc_dir(doc_id) / "gold.json"
        if not path.exists():
            return None
        data = json.loads(path.read_text(encoding="utf-8"))
        return GoldEntitySet(
            entities=tuple(entity_from_dict(e) for e in data["entities"]),
            links=tuple((int(k), int(v)) for k, v in data["links"]),
        )

    def save_entities(
        self,
        doc_id: str,
        entities: Sequence[Entity],
        links: LinkResult,
        predictions: Sequence[TokenPrediction],
        classifier: str,
    ):
        _atomic_write(
            self.doc_dir(doc_id) / "entities.json",
            _dump(
                {
                    "doc_id": doc_id,
                    "classifier": classifier,
                    "entities": [entity_to_dict(e) for e in entities],
                    "links": link_result_to_dict(links),
                    "predictions": [prediction_to_dict(p) for p in predictions],
                }
            ),
        )

    def load_entities(
        self, doc_id: str
    ) -> tuple[tuple[Entity, ...], LinkResult, tuple[TokenPrediction, ...], str]:
        path = self.doc_dir(doc_id) / "entities.json"
        if not path.exists():
            raise NotFoundError(f"document {doc_id} has not been bootstrapped")
        data = json.loads(path.read_text(encoding="utf-8"))
        return (
            tuple(entity_from_dict(e) for e in data["entities"]),
            link_result_from_dict(data["links"]),
            tuple(prediction_from_dict(p) for p in data["predictions"]),
            data.get("classifier", ""),
        )

    def has_annotations(self, doc_id: str) -> bool:
        return (self.doc_dir(doc_id) / "baseline.json").exists()

    def save_baseline(self, doc_id: str, records: Sequence[AnnotationRecord]):
        payload = _dump(
            {
                "doc_id": doc_id,
                "schema_version": SCHEMA_VERSION,
                "annotations": [r.to_dict() for r in records],
            }
        )
        _atomic_write(self.doc_dir(doc_id) / "baseline.json", payload)
        _atomic_write(self.doc_dir(doc_id) / "annotations.json", payload)

    def load_baseline(self, doc_id: str) -> tuple[AnnotationRecord, ...]:
        path = self.doc_dir(doc_id) / "baseline.json"
        if not path.exists():
            raise NotFoundError(f"document {doc_id} has no annotations")
        data = json.loads(path.read_text(encoding="utf-8"))
        return tuple(AnnotationRecord.from_dict(entry) for entry in data["annotations"])

    # -- the audit log --

    def read_audit(self, doc_id: str | None = None) -> list[ReviewAction]:
        path = self.root / "audit.log"
        if not path.exists():
            return []
        actions = []
        with path.open("r", encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    action = ReviewAction.from_dict(json.loads(line))
                except (json.JSONDecodeError, KeyError, ValueError) as err:
                    raise StoreError(f"audit.log line {line_no} is corrupt: {err}") from err
                if doc_id is None or action.doc_id == doc_id:
                    actions.append(action)
        return actions

    def _next_action_id(self) -> int:
        actions = self.read_audit()
        return actions[-1].action_id + 1 if actions else 1

    def doc_annotations(self, doc_id: str) -> AnnotationState:
        """Current annotation state: baseline replayed through the log."""
        baseline = self.load_baseline(doc_id)
        return replay(baseline, self.read_audit(doc_id), self.schema())

    def commit_action(
        self,
        doc_id: str,
        kind: str,
        annotation_id: str | None,
        payload: dict,
        actor: str = "reviewer",
    ) -> tuple[ReviewAction, AnnotationState]:
        """Validate, append, fsync, then rematerialize the doc view.

        The action is applied to the replayed current state before anything
        touches disk, so invalid transitions never enter the log.
        """
        if not self.has_doc(doc_id):
            raise NotFoundError(f"no document {doc_id}")
        schema = self.schema()
        with self._audit_lock:
            baseline = self.load_baseline(doc_id)
            state = replay(baseline, self.read_audit(doc_id), schema)
            action = ReviewAction(
                action_id=self._next_action_id(),
                doc_id=doc_id,
                kind=kind,
                annotation_id=annotation_id,
                payload=payload,
                actor=actor,
                timestamp=_utc_now(),
            )
            new_state = apply_action(state, action, schema)
            with (self.root / "audit.log").open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(action.to_dict(), ensure_ascii=False) + "\n")
                handle.flush()
                os.fsync(handle.fileno())
        self.materialize(doc_id, new_state)
        return action, new_state

    def materialize(self, doc_id: str, state: AnnotationState | None = None):
        """Rewrite annotations.json from the replayed truth."""
        if state is None:
            state = self.doc_annotations(doc_id)
        records = sorted(state.values(), key=lambda r: r.annotation_id)
        with self._doc_lock(doc_id):
            _atomic_write(
                self.doc_dir(doc_id) / "annotations.json",
                _dump(
                    {
                        "doc_id": doc_id,
                        "schema_version": SCHEMA_VERSION,
                        "annotations": [r.to_dict() for r in records],
                    }
                ),
            )

    # -- iterations --

    def iteration_numbers(self) -> list[int]:
        iter_dir = self.root / "iterations"
        if not iter_dir.exists():
            return []
        numbers = []
        for entry in iter_dir.iterdir():
            if entry.is_dir() and entry.name.isdigit() and (entry / "manifest.json").exists():
                numbers.append(int(entry.name))
        return sorted(numbers)

    def exported_doc_ids(self) -> set[str]:
        exported: set[str] = set()
        for number in self.iteration_numbers():
            manifest = self.load_manifest(number)
            exported.update(manifest.get("doc_ids", []))
        return exported

    def load_manifest(self, number: int) -> dict:
        path = self.root / "iterations" / str(number) / "manifest.json"
        if not path.exists():
            raise NotFoundError(f"no iteration {number}")
        return json.loads(path.read_text(encoding="utf-8"))

    def iteration_dir(self, number: int) -> Path:
        return self.root / "iterations" / str(number)

    def next_iteration_number(self) -> int:
        numbers = self.iteration_numbers()
        return numbers[-1] + 1 if numbers else 1

    def write_iteration(self, number: int, manifest: dict, files: dict[str, str]):
        """Write export files then the manifest; the manifest commits it."""
        target = self.iteration_dir(number)
        if (target / "manifest.json").exists():
            raise StoreError(f"iteration {number} already exists")
        (target / "docs").mkdir(parents=True, exist_ok=True)
        for rel_name, text in files.items():
            _atomic_write(target / rel_name, text)
        _atomic_write(target / "manifest.json", _dump(manifest))
