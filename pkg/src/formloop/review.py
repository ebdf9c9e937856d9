"""Review actions and event-sourced annotation state.

Human corrections are an ordered, append-only stream of actions; the
current annotation set of a document is always the left fold of
``apply_action`` over that stream starting from the auto-generated
baseline. Records are never deleted — rejection is a status, and every
edit payload carries the old value alongside the new one so corrections
remain analyzable as training signal.

Transition rules: accept/reject require status ``auto``; the edit kinds
(edit_label, edit_box, edit_text, relink) are legal on ``auto`` or
``edited`` records and leave them ``edited``; ``add`` creates a record in
status ``edited``. Anything else is an invalid transition.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from .annotate import AnnotationRecord, AnnotationStatus, LabelSchema, normalize_label
from .errors import InvalidTransitionError, NotFoundError, ReplayError
from .model import BBox

ACTION_KINDS = ("accept", "reject", "edit_label", "edit_box", "edit_text", "relink", "add")
EDIT_KINDS = ("edit_label", "edit_box", "edit_text", "relink")


@dataclass(frozen=True)
class ReviewAction:
    """One committed human correction, as stored in the audit log."""

    action_id: int
    doc_id: str
    kind: str
    annotation_id: str | None
    payload: Mapping
    actor: str
    timestamp: str

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.kind == "add":
            if self.annotation_id is not None:
                raise ValueError("add actions carry the new id in the payload, not annotation_id")
        elif not self.annotation_id:
            raise ValueError(f"{self.kind} requires annotation_id")
        object.__setattr__(self, "payload", dict(self.payload))

    def to_dict(self) -> dict:
        return {
            "action_id": self.action_id,
            "doc_id": self.doc_id,
            "kind": self.kind,
            "annotation_id": self.annotation_id,
            "payload": dict(self.payload),
            "actor": self.actor,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ReviewAction":
        return cls(
            action_id=int(data["action_id"]),
            doc_id=data["doc_id"],
            kind=data["kind"],
            annotation_id=data.get("annotation_id"),
            payload=data.get("payload", {}),
            actor=data.get("actor", ""),
            timestamp=data.get("timestamp", ""),
        )


AnnotationState = dict[str, AnnotationRecord]


def state_from_records(records: Iterable[AnnotationRecord]) -> AnnotationState:
    state: AnnotationState = {}
    for record in records:
        if record.annotation_id in state:
            raise ValueError(f"duplicate annotation id {record.annotation_id}")
        state[record.annotation_id] = record
    return state


def _require(condition: bool, message: str):
    if not condition:
        raise InvalidTransitionError(message)


def _payload_field(payload: Mapping, name: str):
    if name not in payload:
        raise InvalidTransitionError(f"payload missing {name!r}")
    return payload[name]


def apply_action(
    state: AnnotationState, action: ReviewAction, schema: LabelSchema | None = None
) -> AnnotationState:
    """Apply one action, returning a new state; the input is not mutated."""
    new_state = dict(state)

    if action.kind == "add":
        payload = action.payload
        new_id = _payload_field(payload, "annotation_id")
        if new_id in new_state:
            raise InvalidTransitionError(f"annotation {new_id} already exists")
        label = _payload_field(payload, "label")
        if normalize_label(label) != label:
            raise InvalidTransitionError(f"label {label!r} is not normalized")
        new_state[new_id] = AnnotationRecord(
            annotation_id=new_id,
            label_id=label,
            value_text=_payload_field(payload, "text"),
            value_box=BBox.from_list(_payload_field(payload, "box")),
            source_key_entity=payload.get("key_entity"),
            source_value_entity=payload.get("value_entity"),
            confidence=float(payload.get("confidence", 1.0)),
            status=AnnotationStatus.EDITED,
        )
        return new_state

    record = new_state.get(action.annotation_id)
    if record is None:
        raise NotFoundError(f"annotation {action.annotation_id} not found")

    if action.kind == "accept":
        _require(
            record.status is AnnotationStatus.AUTO,
            f"cannot accept a record in status {record.status.value}",
        )
        new_state[record.annotation_id] = replace(record, status=AnnotationStatus.ACCEPTED)
        return new_state

    if action.kind == "reject":
        _require(
            record.status is AnnotationStatus.AUTO,
            f"cannot reject a record in status {record.status.value}",
        )
        new_state[record.annotation_id] = replace(record, status=AnnotationStatus.REJECTED)
        return new_state

    # Edit family.
    _require(
        record.status in (AnnotationStatus.AUTO, AnnotationStatus.EDITED),
        f"cannot edit a record in status {record.status.value}",
    )
    payload = action.payload

    if action.kind == "edit_label":
        old, new = _payload_field(payload, "old"), _payload_field(payload, "new")
        _require(record.label_id == old, f"stale old label {old!r} (current {record.label_id!r})")
        if normalize_label(new) != new:
            raise InvalidTransitionError(f"label {new!r} is not normalized")
        updated = replace(record, label_id=new, status=AnnotationStatus.EDITED)
    elif action.kind == "edit_text":
        old, new = _payload_field(payload, "old"), _payload_field(payload, "new")
        _require(record.value_text == old, f"stale old text {old!r}")
        updated = replace(record, value_text=new, status=AnnotationStatus.EDITED)
    elif action.kind == "edit_box":
        old = BBox.from_list(_payload_field(payload, "old"))
        new = BBox.from_list(_payload_field(payload, "new"))
        _require(record.value_box == old, f"stale old box {old.as_list()}")
        updated = replace(record, value_box=new, status=AnnotationStatus.EDITED)
    else:  # relink
        old_label = _payload_field(payload, "old_label")
        new_label = _payload_field(payload, "new_label")
        _require(record.label_id == old_label, f"stale old label {old_label!r}")
        if schema is not None and new_label not in schema:
            raise InvalidTransitionError(f"label {new_label!r} is not in the schema")
        updated = replace(
            record,
            label_id=new_label,
            source_key_entity=payload.get("new_key_entity", record.source_key_entity),
            status=AnnotationStatus.EDITED,
        )

    new_state[record.annotation_id] = updated
    return new_state


def replay(
    baseline: Iterable[AnnotationRecord],
    log: Iterable[ReviewAction],
    schema: LabelSchema | None = None,
) -> AnnotationState:
    """Left fold of apply_action over an ordered action log. Deterministic.

    Any apply failure aborts with the offending action id attached.
    """
    state = state_from_records(baseline)
    last_id = None
    for action in log:
        if last_id is not None and action.action_id <= last_id:
            raise ReplayError(action.action_id, ValueError("log not ordered by action_id"))
        last_id = action.action_id
        try:
            state = apply_action(state, action, schema)
        except (InvalidTransitionError, NotFoundError, ValueError) as err:
            raise ReplayError(action.action_id, err) from err
    return state
