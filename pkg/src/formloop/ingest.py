"""Parsers and exporters for the external file formats.

Two formats are understood:

* OCR TSV — tab-separated word dumps (tesseract ``image_to_data`` layout)
  with the header ``level page_num block_num par_num line_num word_num
  left top width height conf text``. Only level-5 rows become tokens; the
  level-1 row carries the page size. Confidence -1 means "absent".
* FUNSD-style annotation JSON — ``{"form": [...]}`` with per-entity id,
  text, box, label, words, and linking. Our exporter additionally writes a
  top-level ``"page"`` object (the upstream format has no page size), an
  optional ``"conf"`` per word, and — for training exports — a
  ``"generic_label"`` fallback next to document-specific labels.

Parsed tokens must lie within page bounds; violations are format errors,
never silently clamped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import FormatError
from .model import BBox, Document, Entity, GenericLabel, Page, Token, check_disjoint

TSV_COLUMNS = [
    "level",
    "page_num",
    "block_num",
    "par_num",
    "line_num",
    "word_num",
    "left",
    "top",
    "width",
    "height",
    "conf",
    "text",
]

# FUNSD label names <-> generic labels.
FUNSD_LABELS = {
    "question": GenericLabel.KEY,
    "answer": GenericLabel.VALUE,
    "header": GenericLabel.HEADER,
    "other": GenericLabel.OTHER,
}
GENERIC_TO_FUNSD = {v: k for k, v in FUNSD_LABELS.items()}


@dataclass(frozen=True)
class GoldEntitySet:
    """Gold entities with key->value links, as found in annotation files."""

    entities: tuple[Entity, ...]
    links: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "entities", tuple(self.entities))
        object.__setattr__(self, "links", tuple(self.links))
        by_id = {e.entity_id: e for e in self.entities}
        if len(by_id) != len(self.entities):
            raise ValueError("duplicate entity ids in gold set")
        check_disjoint(self.entities)
        for key_id, value_id in self.links:
            if key_id not in by_id or value_id not in by_id:
                raise ValueError(f"link ({key_id},{value_id}) references missing entity")
            if by_id[key_id].label is not GenericLabel.KEY:
                raise ValueError(f"link ({key_id},{value_id}) does not start at a key")
            if by_id[value_id].label is not GenericLabel.VALUE:
                raise ValueError(f"link ({key_id},{value_id}) does not end at a value")

    def entity(self, entity_id: int) -> Entity:
        for e in self.entities:
            if e.entity_id == entity_id:
                return e
        raise KeyError(entity_id)


def parse_ocr_tsv(content: str, doc_id: str = "doc") -> Document:
    """Parse an OCR TSV dump into a Document.

    One token per level-5 row with non-blank text; box is
    (left, top, left+width, top+height); conf >= 0 maps to conf/100,
    conf == -1 to absent. Page size comes from the level-1 row.
    """
    lines = content.splitlines()
    if not lines:
        raise FormatError("empty TSV: missing header row")
    header = lines[0].rstrip("\n").split("\t")
    if header != TSV_COLUMNS:
        raise FormatError(
            f"line 1: bad TSV header; expected {TSV_COLUMNS}, got {header}"
        )

    page: Page | None = None
    tokens: list[Token] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        cells = raw.split("\t")
        if len(cells) != len(TSV_COLUMNS):
            raise FormatError(
                f"line {lineno}: expected {len(TSV_COLUMNS)} columns, got {len(cells)}"
            )
        row = dict(zip(TSV_COLUMNS, cells))
        try:
            level = int(row["level"])
            left, top = int(row["left"]), int(row["top"])
            width, height = int(row["width"]), int(row["height"])
            conf = float(row["conf"])
        except ValueError as err:
            raise FormatError(f"line {lineno}: non-numeric geometry or confidence: {err}") from None

        if level == 1 and page is None:
            try:
                page = Page(width=width, height=height)
            except ValueError as err:
                raise FormatError(f"line {lineno}: bad page row: {err}") from None
        elif level == 5:
            text = row["text"].strip()
            if not text:
                continue  # blank OCR rows carry no information
            try:
                box = BBox(left, top, left + width, top + height)
                tokens.append(
                    Token(
                        index=len(tokens),
                        text=text,
                        box=box,
                        ocr_confidence=(conf / 100.0) if conf >= 0 else None,
                    )
                )
            except ValueError as err:
                raise FormatError(f"line {lineno}: {err}") from None

    if page is None:
        raise FormatError("no level=1 page row in TSV")
    try:
        return Document(doc_id=doc_id, page=page, tokens=tuple(tokens))
    except ValueError as err:
        raise FormatError(str(err)) from None


def _resolve_label(entry: Mapping, entry_no: int) -> GenericLabel:
    label = entry.get("label")
    if label in FUNSD_LABELS:
        return FUNSD_LABELS[label]
    fallback = entry.get("generic_label")
    if fallback in FUNSD_LABELS:
        return FUNSD_LABELS[fallback]
    raise FormatError(f"form entry {entry_no}: unknown label {label!r}")


def parse_funsd(content: str, doc_id: str) -> tuple[Document, GoldEntitySet]:
    """Parse a FUNSD-style annotation file into (Document, GoldEntitySet).

    Tokens are flattened from all ``words`` arrays in form order; entity
    text/box are recomputed from the words. Linking pairs are normalized to
    (key_id, value_id) using the entity labels (the format does not
    guarantee pair order), deduplicated, and pairs that do not connect a
    key to a value are skipped.
    """
    try:
        data = json.loads(content)
    except json.JSONDecodeError as err:
        raise FormatError(f"invalid JSON: {err}") from None
    if not isinstance(data, dict) or not isinstance(data.get("form"), list):
        raise FormatError('annotation file must be an object with a "form" array')

    tokens: list[Token] = []
    entities: list[Entity] = []
    label_by_id: dict[int, GenericLabel] = {}
    raw_links: list[tuple[int, int]] = []

    for entry_no, entry in enumerate(data["form"]):
        if not isinstance(entry, dict):
            raise FormatError(f"form entry {entry_no}: not an object")
        if "id" not in entry:
            raise FormatError(f"form entry {entry_no}: missing id")
        entity_id = entry["id"]
        if not isinstance(entity_id, int):
            raise FormatError(f"form entry {entry_no}: id must be an integer")
        label = _resolve_label(entry, entry_no)

        member_tokens: list[Token] = []
        for word in entry.get("words", []):
            text = str(word.get("text", "")).strip()
            if not text:
                continue
            try:
                box = BBox.from_list(word["box"])
            except (KeyError, TypeError, ValueError) as err:
                raise FormatError(f"form entry {entry_no}: bad word box: {err}") from None
            conf = word.get("conf")
            if conf is not None:
                conf = float(conf)
            member_tokens.append(
                Token(index=len(tokens), text=text, box=box, ocr_confidence=conf)
            )
            tokens.append(member_tokens[-1])

        if not member_tokens:
            continue  # word-less entities carry nothing to link or train on
        if entity_id in label_by_id:
            raise FormatError(f"form entry {entry_no}: duplicate id {entity_id}")
        entities.append(Entity.from_tokens(entity_id, label, member_tokens))
        label_by_id[entity_id] = label

        for pair in entry.get("linking", []):
            if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
                raise FormatError(f"form entry {entry_no}: bad linking pair {pair!r}")
            raw_links.append((pair[0], pair[1]))

    known_ids = set(label_by_id)
    all_ids = {e["id"] for e in data["form"] if isinstance(e, dict) and "id" in e}
    links: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for a, b in raw_links:
        if a not in all_ids or b not in all_ids:
            raise FormatError(f"linking pair ({a},{b}) references missing id")
        if a not in known_ids or b not in known_ids:
            continue  # endpoint was a dropped word-less entity
        la, lb = label_by_id[a], label_by_id[b]
        if la is GenericLabel.KEY and lb is GenericLabel.VALUE:
            pair = (a, b)
        elif la is GenericLabel.VALUE and lb is GenericLabel.KEY:
            pair = (b, a)
        else:
            continue  # not a key-value link
        if pair not in seen:
            seen.add(pair)
            links.append(pair)

    page_info = data.get("page")
    if isinstance(page_info, dict) and "width" in page_info and "height" in page_info:
        page = Page(
            width=int(page_info["width"]),
            height=int(page_info["height"]),
            image_ref=page_info.get("image_ref"),
        )
    else:
        # Upstream files carry no page size; bound the page by the content.
        max_x = max((t.box.x2 for t in tokens), default=1)
        max_y = max((t.box.y2 for t in tokens), default=1)
        page = Page(width=max(max_x, 1), height=max(max_y, 1))

    try:
        document = Document(doc_id=doc_id, page=page, tokens=tuple(tokens))
        gold = GoldEntitySet(entities=tuple(entities), links=tuple(links))
    except ValueError as err:
        raise FormatError(str(err)) from None
    return document, gold


def export_funsd(
    document: Document,
    entities: Sequence[Entity],
    links: Sequence[tuple[int, int]],
    specific_labels: Mapping[int, str] | None = None,
    annotation_boxes: Mapping[int, BBox] | None = None,
    annotation_texts: Mapping[int, str] | None = None,
) -> str:
    """Serialize a document and its entities to FUNSD-style JSON text.

    Every document token must belong to exactly one entity (training files
    need full-page coverage); entities are written in entity-id order with
    a link mirrored into both endpoints. ``specific_labels`` maps entity id
    to a document-specific label: those entries get it as ``label`` and keep
    the generic name in ``generic_label``. ``annotation_boxes`` and
    ``annotation_texts`` override the written entity box and text (reviewers
    may have adjusted either).
    """
    check_disjoint(entities)
    covered = {i for e in entities for i in e.token_indices}
    missing = [t.index for t in document.tokens if t.index not in covered]
    if missing:
        raise ValueError(f"tokens not covered by any entity: {missing[:10]}")
    by_id = {e.entity_id: e for e in entities}
    for key_id, value_id in links:
        if key_id not in by_id or value_id not in by_id:
            raise ValueError(f"link ({key_id},{value_id}) references missing entity")

    linking_of: dict[int, list[list[int]]] = {e.entity_id: [] for e in entities}
    for key_id, value_id in links:
        linking_of[key_id].append([key_id, value_id])
        linking_of[value_id].append([key_id, value_id])

    specific_labels = specific_labels or {}
    annotation_boxes = annotation_boxes or {}
    annotation_texts = annotation_texts or {}
    form = []
    for entity in sorted(entities, key=lambda e: e.entity_id):
        words = []
        for idx in entity.token_indices:
            tok = document.token(idx)
            word: dict = {"text": tok.text, "box": tok.box.as_list()}
            if tok.ocr_confidence is not None:
                word["conf"] = tok.ocr_confidence
            words.append(word)
        box = annotation_boxes.get(entity.entity_id, entity.box)
        entry: dict = {
            "id": entity.entity_id,
            "text": annotation_texts.get(entity.entity_id, entity.text),
            "box": box.as_list(),
            "label": GENERIC_TO_FUNSD[entity.label],
            "words": words,
            "linking": linking_of[entity.entity_id],
        }
        if entity.entity_id in specific_labels:
            entry["generic_label"] = entry["label"]
            entry["label"] = specific_labels[entity.entity_id]
        form.append(entry)

    payload = {
        "form": form,
        "page": {
            "width": document.page.width,
            "height": document.page.height,
            "image_ref": document.page.image_ref,
        },
    }
    return json.dumps(payload, ensure_ascii=False, indent=1)
