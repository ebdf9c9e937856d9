"""Line grouping and reading order over boxes and entities.

Boxes are grouped into lines by vertical overlap (two boxes share a line
when the overlap of their y-spans is at least half the smaller height,
closed transitively), lines run top to bottom, and members run left to
right within a line. This matches how Latin-script forms are read; it is
not a multi-column layout analyzer.
"""

from __future__ import annotations

from statistics import median
from typing import Sequence

from .model import BBox, Entity, Token, vertical_overlap_ratio

DEFAULT_LINE_OVERLAP = 0.5


def group_into_lines(
    boxes: Sequence[BBox], overlap_threshold: float = DEFAULT_LINE_OVERLAP
) -> list[list[int]]:
    """Partition box positions into lines.

    Returns lists of indices into ``boxes``. Lines are ordered by the minimum
    y1 of their members (ties by minimum x1, then smallest index); within a
    line, indices are ordered by (x1, index).
    """
    n = len(boxes)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if vertical_overlap_ratio(boxes[i], boxes[j]) >= overlap_threshold:
                parent[find(i)] = find(j)

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)

    lines = [sorted(members, key=lambda i: (boxes[i].x1, i)) for members in groups.values()]
    lines.sort(
        key=lambda line: (
            min(boxes[i].y1 for i in line),
            min(boxes[i].x1 for i in line),
            min(line),
        )
    )
    return lines


def reading_order(
    entities: Sequence[Entity], overlap_threshold: float = DEFAULT_LINE_OVERLAP
) -> list[int]:
    """Total order over entities: line-major, left to right, ties by id.

    Returns entity ids in reading order; the position of an id in the result
    is its rank. Deterministic and invariant under permutation of the input.
    """
    order = sorted(entities, key=lambda e: e.entity_id)
    lines = group_into_lines([e.box for e in order], overlap_threshold)
    ranked: list[int] = []
    for line in lines:
        for pos in sorted(line, key=lambda i: (order[i].box.x1, order[i].entity_id)):
            ranked.append(order[pos].entity_id)
    return ranked


def token_reading_order(
    tokens: Sequence[Token], overlap_threshold: float = DEFAULT_LINE_OVERLAP
) -> tuple[list[int], dict[int, int]]:
    """Reading order over tokens plus each token's line number.

    Returns (token indices in reading order, token index -> line ordinal).
    """
    order = sorted(tokens, key=lambda t: t.index)
    lines = group_into_lines([t.box for t in order], overlap_threshold)
    ranked: list[int] = []
    line_of: dict[int, int] = {}
    for line_no, line in enumerate(lines):
        for pos in sorted(line, key=lambda i: (order[i].box.x1, order[i].index)):
            ranked.append(order[pos].index)
            line_of[order[pos].index] = line_no
    return ranked, line_of


def median_token_height(tokens: Sequence[Token]) -> float:
    """Median box height over the page's tokens; 0.0 for an empty page."""
    if not tokens:
        return 0.0
    return float(median(t.box.height for t in tokens))
