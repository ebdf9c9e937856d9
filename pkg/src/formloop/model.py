"""Core document model: boxes, tokens, pages, entities, and box arithmetic.

Coordinates are integer pixels with the origin at the top-left corner;
x grows rightward, y grows downward. All types are immutable after
construction, and every function here is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence


class GenericLabel(str, Enum):
    """The four generic region labels a form token can carry."""

    KEY = "key"
    VALUE = "value"
    HEADER = "header"
    OTHER = "other"


# Fixed order used for deterministic argmax tie-breaking.
LABEL_ORDER: tuple[GenericLabel, ...] = (
    GenericLabel.KEY,
    GenericLabel.VALUE,
    GenericLabel.HEADER,
    GenericLabel.OTHER,
)


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box <x1,y1,x2,y2>, top-left origin, x1<=x2 and y1<=y2."""

    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self):
        for name in ("x1", "y1", "x2", "y2"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ValueError(f"BBox.{name} must be an int, got {v!r}")
            if v < 0:
                raise ValueError(f"BBox.{name} must be >= 0, got {v}")
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise ValueError(f"BBox corners out of order: {self.as_list()}")

    @property
    def width(self) -> int:
        return self.x2 - self.x1

    @property
    def height(self) -> int:
        return self.y2 - self.y1

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)

    def as_list(self) -> list[int]:
        return [self.x1, self.y1, self.x2, self.y2]

    @classmethod
    def from_list(cls, coords: Sequence[int]) -> "BBox":
        if len(coords) != 4:
            raise ValueError(f"box needs 4 coordinates, got {coords!r}")
        return cls(int(coords[0]), int(coords[1]), int(coords[2]), int(coords[3]))


def bbox_union(a: BBox, b: BBox) -> BBox:
    """Smallest box containing both inputs."""
    return BBox(min(a.x1, b.x1), min(a.y1, b.y1), max(a.x2, b.x2), max(a.y2, b.y2))


def center_distance(a: BBox, b: BBox, vertical_weight: float = 1.0) -> float:
    """Weighted Euclidean distance between box centers.

    The vertical component is scaled by ``vertical_weight`` before squaring,
    so weights above 1 penalize cross-line proximity. Symmetric, and zero
    exactly when the centers coincide.
    """
    if vertical_weight <= 0:
        raise ValueError(f"vertical_weight must be > 0, got {vertical_weight}")
    acx, acy = a.center
    bcx, bcy = b.center
    dx = acx - bcx
    dy = vertical_weight * (acy - bcy)
    return math.sqrt(dx * dx + dy * dy)


def vertical_overlap_ratio(a: BBox, b: BBox) -> float:
    """Overlap of the two y-spans divided by the smaller box height.

    Disjoint spans give 0.0, full containment gives 1.0. A zero-height box
    counts as fully overlapping when its y lies within the other's span.
    """
    if a.height == 0 or b.height == 0:
        flat, other = (a, b) if a.height == 0 else (b, a)
        return 1.0 if other.y1 <= flat.y1 <= other.y2 else 0.0
    overlap = min(a.y2, b.y2) - max(a.y1, b.y1)
    if overlap <= 0:
        return 0.0
    return min(1.0, overlap / min(a.height, b.height))


@dataclass(frozen=True)
class Token:
    """One OCR word: ordinal index, text, box, optional OCR confidence."""

    index: int
    text: str
    box: BBox
    ocr_confidence: float | None = None

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"token index must be >= 0, got {self.index}")
        if not self.text.strip():
            raise ValueError(f"token {self.index} has blank text")
        if self.ocr_confidence is not None and not 0.0 <= self.ocr_confidence <= 1.0:
            raise ValueError(
                f"token {self.index} confidence {self.ocr_confidence} outside [0,1]"
            )


@dataclass(frozen=True)
class Page:
    """Page geometry plus an optional path to its rendered image."""

    width: int
    height: int
    image_ref: str | None = None

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"page size must be positive, got {self.width}x{self.height}")

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)


@dataclass(frozen=True)
class Document:
    """A single page of OCR tokens with contiguous indices 0..n-1."""

    doc_id: str
    page: Page
    tokens: tuple[Token, ...]

    def __post_init__(self):
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for pos, tok in enumerate(self.tokens):
            if tok.index != pos:
                raise ValueError(
                    f"token indices must be contiguous 0..n-1; slot {pos} holds index {tok.index}"
                )
            if tok.box.x2 > self.page.width or tok.box.y2 > self.page.height:
                raise ValueError(
                    f"token {pos} box {tok.box.as_list()} exceeds page "
                    f"{self.page.width}x{self.page.height}"
                )

    def token(self, index: int) -> Token:
        if not 0 <= index < len(self.tokens):
            raise KeyError(index)
        return self.tokens[index]


@dataclass(frozen=True)
class Entity:
    """A contiguous group of tokens sharing one generic label.

    ``text`` is always the member token texts joined by single spaces and
    ``box`` the union of member boxes; use :meth:`from_tokens` to build one.
    """

    entity_id: int
    label: GenericLabel
    token_indices: tuple[int, ...]
    text: str
    box: BBox

    def __post_init__(self):
        object.__setattr__(self, "token_indices", tuple(self.token_indices))
        if not self.token_indices:
            raise ValueError(f"entity {self.entity_id} has no tokens")
        if len(set(self.token_indices)) != len(self.token_indices):
            raise ValueError(f"entity {self.entity_id} repeats a token index")

    @classmethod
    def from_tokens(
        cls, entity_id: int, label: GenericLabel, tokens: Sequence[Token]
    ) -> "Entity":
        if not tokens:
            raise ValueError(f"entity {entity_id} needs at least one token")
        box = tokens[0].box
        for tok in tokens[1:]:
            box = bbox_union(box, tok.box)
        return cls(
            entity_id=entity_id,
            label=label,
            token_indices=tuple(t.index for t in tokens),
            text=" ".join(t.text for t in tokens),
            box=box,
        )

    def recompute(self, document: Document) -> "Entity":
        """Rebuild text/box from the document's tokens (invariant check aid)."""
        return Entity.from_tokens(
            self.entity_id, self.label, [document.token(i) for i in self.token_indices]
        )


def check_disjoint(entities: Iterable[Entity]) -> None:
    """Raise if any token belongs to more than one entity."""
    seen: dict[int, int] = {}
    for ent in entities:
        for idx in ent.token_indices:
            if idx in seen:
                raise ValueError(
                    f"token {idx} belongs to entities {seen[idx]} and {ent.entity_id}"
                )
            seen[idx] = ent.entity_id
