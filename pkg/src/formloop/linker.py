"""Greedy geometric key-value linking.

Values are visited in reading order. Each value links to the key that
(1) precedes it in reading order, (2) is not already linked to another
value, and (3) is nearest by weighted center distance among such keys —
optionally only within a fraction of the page diagonal. A value with no
eligible key is dropped; keys that never get a value are reported as
unlinked. The scan is deliberately sequential per value: a global optimal
assignment would produce different pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

from typing import Sequence

from .layout import reading_order
from .model import BBox, Entity, GenericLabel, Page, center_distance


@dataclass(frozen=True)
class LinkConfig:
    """Linker knobs.

    ``vertical_weight`` scales the vertical term of the distance metric
    (values above 1 penalize cross-line links). ``max_link_distance_ratio``
    bounds candidate distance to that fraction of the page diagonal;
    ``None`` means unbounded, which reproduces the bare nearest-key rule.
    """

    vertical_weight: float = 1.0
    max_link_distance_ratio: float | None = 0.5

    def __post_init__(self):
        if self.vertical_weight <= 0:
            raise ValueError(f"vertical_weight must be > 0, got {self.vertical_weight}")
        if self.max_link_distance_ratio is not None and not (
            0 < self.max_link_distance_ratio <= 1
        ):
            raise ValueError(
                f"max_link_distance_ratio must be in (0,1] or None, "
                f"got {self.max_link_distance_ratio}"
            )

    def max_distance(self, page: Page) -> float | None:
        if self.max_link_distance_ratio is None:
            return None
        return self.max_link_distance_ratio * page.diagonal


@dataclass(frozen=True)
class LinkResult:
    """Pairs plus the leftovers: dropped values and never-linked keys."""

    pairs: tuple[tuple[int, int], ...]
    dropped_values: tuple[int, ...]
    unlinked_keys: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))
        object.__setattr__(self, "dropped_values", tuple(self.dropped_values))
        object.__setattr__(self, "unlinked_keys", tuple(self.unlinked_keys))
        keys = [k for k, _ in self.pairs]
        values = [v for _, v in self.pairs]
        if len(set(keys)) != len(keys):
            raise ValueError("a key appears in two pairs")
        if len(set(values)) != len(values):
            raise ValueError("a value appears in two pairs")
        if set(values) & set(self.dropped_values):
            raise ValueError("a value is both paired and dropped")
        if set(keys) & set(self.unlinked_keys):
            raise ValueError("a key is both paired and unlinked")


def link(
    entities: Sequence[Entity], page: Page, config: LinkConfig = LinkConfig()
) -> LinkResult:
    """Link each value entity to at most one preceding, unclaimed, nearest key.

    Header and other entities are ignored. Distance ties break toward the
    key earlier in reading order. Deterministic and invariant under
    permutation of the input list.
    """
    relevant = [
        e for e in entities if e.label in (GenericLabel.KEY, GenericLabel.VALUE)
    ]
    order = reading_order(relevant)
    rank = {entity_id: pos for pos, entity_id in enumerate(order)}
    by_id = {e.entity_id: e for e in relevant}

    keys = sorted(
        (e for e in relevant if e.label is GenericLabel.KEY), key=lambda e: rank[e.entity_id]
    )
    values = sorted(
        (e for e in relevant if e.label is GenericLabel.VALUE),
        key=lambda e: rank[e.entity_id],
    )

    max_dist = config.max_distance(page)
    claimed: set[int] = set()
    pairs: list[tuple[int, int]] = []
    dropped: list[int] = []

    for value in values:
        best: Entity | None = None
        best_dist = 0.0
        for key in keys:
            if rank[key.entity_id] >= rank[value.entity_id]:
                continue  # key must precede the value
            if key.entity_id in claimed:
                continue  # one value per key
            dist = center_distance(key.box, value.box, config.vertical_weight)
            if max_dist is not None and dist > max_dist:
                continue
            if best is None or dist < best_dist:
                best, best_dist = key, dist
            # equal distance: keys iterate in reading order, keep the earlier
        if best is None:
            dropped.append(value.entity_id)
        else:
            claimed.add(best.entity_id)
            pairs.append((best.entity_id, value.entity_id))

    unlinked = [k.entity_id for k in keys if k.entity_id not in claimed]
    return LinkResult(
        pairs=tuple(pairs), dropped_values=tuple(dropped), unlinked_keys=tuple(unlinked)
    )
