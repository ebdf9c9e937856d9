"""Naive reference linker used only to cross-check the production one.

This is a from-scratch simulation of the linking procedure — its own line
grouping, its own ordering, squared-distance comparisons — sharing nothing
with :mod:`formloop.linker` or :mod:`formloop.layout` beyond the public
data types. Quadratic everywhere; intended for small inputs (<= ~12
entities) inside tests.
"""

from __future__ import annotations

from typing import Sequence

from .linker import LinkConfig, LinkResult
from .model import Entity, GenericLabel, Page


def _spans_share_line(a, b, threshold: float) -> bool:
    # Inline re-statement of the vertical-overlap rule.
    ah = a.y2 - a.y1
    bh = b.y2 - b.y1
    if ah == 0 or bh == 0:
        flat, other = (a, b) if ah == 0 else (b, a)
        return other.y1 <= flat.y1 <= other.y2
    lo = a.y1 if a.y1 > b.y1 else b.y1
    hi = a.y2 if a.y2 < b.y2 else b.y2
    if hi - lo <= 0:
        return False
    smaller = ah if ah < bh else bh
    return (hi - lo) / smaller >= threshold


def _positions(entities: Sequence[Entity], threshold: float = 0.5) -> dict[int, int]:
    """Reading-order rank per entity id, computed the slow way."""
    pool = sorted(entities, key=lambda e: e.entity_id)
    # Breadth-first connected components over the share-a-line relation.
    unassigned = list(range(len(pool)))
    lines: list[list[int]] = []
    while unassigned:
        frontier = [unassigned.pop(0)]
        component = [frontier[0]]
        while frontier:
            cur = frontier.pop()
            still = []
            for other in unassigned:
                if _spans_share_line(pool[cur].box, pool[other].box, threshold):
                    component.append(other)
                    frontier.append(other)
                else:
                    still.append(other)
            unassigned = still
        lines.append(component)

    def line_sort_key(component: list[int]):
        tops = [pool[i].box.y1 for i in component]
        lefts = [pool[i].box.x1 for i in component]
        ids = [pool[i].entity_id for i in component]
        return (min(tops), min(lefts), min(ids))

    lines.sort(key=line_sort_key)
    rank: dict[int, int] = {}
    counter = 0
    for component in lines:
        component.sort(key=lambda i: (pool[i].box.x1, pool[i].entity_id))
        for i in component:
            rank[pool[i].entity_id] = counter
            counter += 1
    return rank


def link_oracle(
    entities: Sequence[Entity], page: Page, config: LinkConfig = LinkConfig()
) -> LinkResult:
    """Literal simulation of the linking procedure; same contract as link()."""
    keys = [e for e in entities if e.label is GenericLabel.KEY]
    values = [e for e in entities if e.label is GenericLabel.VALUE]
    pos = _positions(keys + values)

    w = config.vertical_weight
    if config.max_link_distance_ratio is None:
        limit_sq = None
    else:
        diag_sq = page.width * page.width + page.height * page.height
        limit_sq = (config.max_link_distance_ratio**2) * diag_sq

    def dist_sq(a: Entity, b: Entity) -> float:
        acx = (a.box.x1 + a.box.x2) / 2.0
        acy = (a.box.y1 + a.box.y2) / 2.0
        bcx = (b.box.x1 + b.box.x2) / 2.0
        bcy = (b.box.y1 + b.box.y2) / 2.0
        return (acx - bcx) ** 2 + (w * (acy - bcy)) ** 2

    linked_keys: list[int] = []
    pairs: list[tuple[int, int]] = []
    dropped: list[int] = []
    for value in sorted(values, key=lambda v: pos[v.entity_id]):
        candidates = []
        for key in keys:
            if not pos[key.entity_id] < pos[value.entity_id]:
                continue
            if key.entity_id in linked_keys:
                continue
            d = dist_sq(key, value)
            if limit_sq is not None and d > limit_sq:
                continue
            candidates.append((d, pos[key.entity_id], key.entity_id))
        if not candidates:
            dropped.append(value.entity_id)
            continue
        candidates.sort()
        _, _, chosen = candidates[0]
        linked_keys.append(chosen)
        pairs.append((chosen, value.entity_id))

    unlinked = sorted(
        (k.entity_id for k in keys if k.entity_id not in linked_keys),
        key=lambda kid: pos[kid],
    )
    return LinkResult(
        pairs=tuple(pairs), dropped_values=tuple(dropped), unlinked_keys=tuple(unlinked)
    )
