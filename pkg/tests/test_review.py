import random

import pytest

from formloop.annotate import AnnotationRecord, AnnotationStatus, LabelSchema, SchemaLabel
from formloop.errors import InvalidTransitionError, NotFoundError, ReplayError
from formloop.model import BBox
from formloop.review import (
    ACTION_KINDS,
    ReviewAction,
    apply_action,
    replay,
    state_from_records,
)


def rec(aid="d-a0", label="date", text="12/10/98", box=(0, 0, 10, 10), status=AnnotationStatus.AUTO):
    return AnnotationRecord(
        annotation_id=aid,
        label_id=label,
        value_text=text,
        value_box=BBox(*box),
        source_key_entity=0,
        source_value_entity=1,
        confidence=0.9,
        status=status,
    )


def act(kind, aid="d-a0", payload=None, action_id=1):
    return ReviewAction(
        action_id=action_id,
        doc_id="d",
        kind=kind,
        annotation_id=None if kind == "add" else aid,
        payload=payload or {},
        actor="tester",
        timestamp="2026-08-21T00:00:00Z",
    )


class TestReviewAction:
    def test_roundtrip(self):
        a = act("edit_text", payload={"old": "x", "new": "y"})
        assert ReviewAction.from_dict(a.to_dict()) == a

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            act("delete")

    def test_add_must_not_target_existing_id(self):
        with pytest.raises(ValueError, match="payload"):
            ReviewAction(1, "d", "add", "d-a0", {}, "t", "now")

    def test_non_add_requires_target(self):
        with pytest.raises(ValueError, match="annotation_id"):
            ReviewAction(1, "d", "accept", None, {}, "t", "now")


class TestTransitions:
    def test_accept(self):
        state = state_from_records([rec()])
        out = apply_action(state, act("accept"))
        assert out["d-a0"].status is AnnotationStatus.ACCEPTED
        # Input state untouched.
        assert state["d-a0"].status is AnnotationStatus.AUTO

    def test_reject_keeps_record(self):
        out = apply_action(state_from_records([rec()]), act("reject"))
        assert out["d-a0"].status is AnnotationStatus.REJECTED
        assert "d-a0" in out

    @pytest.mark.parametrize("first", ["accept", "reject"])
    @pytest.mark.parametrize("second", ["accept", "reject"])
    def test_accept_reject_not_repeatable(self, first, second):
        state = apply_action(state_from_records([rec()]), act(first))
        with pytest.raises(InvalidTransitionError):
            apply_action(state, act(second, action_id=2))

    def test_edit_label(self):
        out = apply_action(
            state_from_records([rec()]),
            act("edit_label", payload={"old": "date", "new": "ship_date"}),
        )
        assert out["d-a0"].label_id == "ship_date"
        assert out["d-a0"].status is AnnotationStatus.EDITED

    def test_edit_label_requires_normalized_new(self):
        with pytest.raises(InvalidTransitionError, match="normalized"):
            apply_action(
                state_from_records([rec()]),
                act("edit_label", payload={"old": "date", "new": "Ship Date:"}),
            )

    def test_edit_text_and_box(self):
        state = state_from_records([rec()])
        state = apply_action(state, act("edit_text", payload={"old": "12/10/98", "new": "12/10/1998"}))
        state = apply_action(
            state,
            act("edit_box", payload={"old": [0, 0, 10, 10], "new": [0, 0, 12, 10]}, action_id=2),
        )
        assert state["d-a0"].value_text == "12/10/1998"
        assert state["d-a0"].value_box == BBox(0, 0, 12, 10)

    def test_edits_allowed_on_edited_records(self):
        state = state_from_records([rec(status=AnnotationStatus.EDITED)])
        out = apply_action(state, act("edit_text", payload={"old": "12/10/98", "new": "x"}))
        assert out["d-a0"].value_text == "x"

    @pytest.mark.parametrize("status", [AnnotationStatus.ACCEPTED, AnnotationStatus.REJECTED])
    def test_edits_forbidden_after_decision(self, status):
        state = state_from_records([rec(status=status)])
        with pytest.raises(InvalidTransitionError):
            apply_action(state, act("edit_text", payload={"old": "12/10/98", "new": "x"}))

    @pytest.mark.parametrize(
        "kind,payload",
        [
            ("edit_label", {"old": "wrong", "new": "ship_date"}),
            ("edit_text", {"old": "wrong", "new": "x"}),
            ("edit_box", {"old": [9, 9, 99, 99], "new": [0, 0, 1, 1]}),
            ("relink", {"old_label": "wrong", "new_label": "date"}),
        ],
    )
    def test_stale_old_value_rejected(self, kind, payload):
        with pytest.raises(InvalidTransitionError, match="stale"):
            apply_action(state_from_records([rec()]), act(kind, payload=payload))

    def test_missing_payload_field(self):
        with pytest.raises(InvalidTransitionError, match="missing"):
            apply_action(state_from_records([rec()]), act("edit_text", payload={"new": "x"}))

    def test_unknown_annotation(self):
        with pytest.raises(NotFoundError):
            apply_action({}, act("accept"))

    def test_relink(self):
        schema = LabelSchema(
            labels=(
                SchemaLabel("date", "Date:", ("Date:",), 1),
                SchemaLabel("ship_date", "Ship Date:", ("Ship Date:",), 1),
            )
        )
        out = apply_action(
            state_from_records([rec()]),
            act(
                "relink",
                payload={"old_label": "date", "new_label": "ship_date", "new_key_entity": 7},
            ),
            schema,
        )
        assert out["d-a0"].label_id == "ship_date"
        assert out["d-a0"].source_key_entity == 7
        assert out["d-a0"].status is AnnotationStatus.EDITED

    def test_relink_outside_schema(self):
        schema = LabelSchema(labels=(SchemaLabel("date", "Date:", ("Date:",), 1),))
        with pytest.raises(InvalidTransitionError, match="schema"):
            apply_action(
                state_from_records([rec()]),
                act("relink", payload={"old_label": "date", "new_label": "mystery"}),
                schema,
            )

    def test_add(self):
        payload = {
            "annotation_id": "d-m0",
            "label": "po_number",
            "text": "4411",
            "box": [5, 5, 50, 25],
        }
        out = apply_action({}, act("add", payload=payload))
        added = out["d-m0"]
        assert added.status is AnnotationStatus.EDITED
        assert added.label_id == "po_number"
        assert added.source_key_entity is None

    def test_add_existing_id_rejected(self):
        payload = {"annotation_id": "d-a0", "label": "x", "text": "t", "box": [0, 0, 1, 1]}
        with pytest.raises(InvalidTransitionError, match="exists"):
            apply_action(state_from_records([rec()]), act("add", payload=payload))

    def test_add_unnormalized_label_rejected(self):
        payload = {"annotation_id": "d-m0", "label": "PO #", "text": "t", "box": [0, 0, 1, 1]}
        with pytest.raises(InvalidTransitionError, match="normalized"):
            apply_action({}, act("add", payload=payload))


class TestReplay:
    def test_fold_matches_incremental(self):
        baseline = [rec(), rec(aid="d-a1", label="to", text="Bob")]
        log = [
            act("accept", aid="d-a1", action_id=1),
            act("edit_text", payload={"old": "12/10/98", "new": "12/10/1998"}, action_id=2),
            act("edit_label", payload={"old": "date", "new": "ship_date"}, action_id=3),
        ]
        incremental = state_from_records(baseline)
        for action in log:
            incremental = apply_action(incremental, action)
        assert replay(baseline, log) == incremental

    def test_out_of_order_log_rejected(self):
        baseline = [rec()]
        log = [act("accept", action_id=2), act("reject", action_id=1)]
        with pytest.raises(ReplayError):
            replay(baseline, log)

    def test_replay_error_carries_action_id(self):
        log = [act("accept", action_id=5)]  # no such annotation
        with pytest.raises(ReplayError) as exc:
            replay([], log)
        assert exc.value.action_id == 5
        assert isinstance(exc.value.cause, NotFoundError)

    def test_randomized_sequences_replay_identically(self):
        """Generated action stream: fold(log) == incremental state, always."""
        rng = random.Random(20260821)
        for trial in range(40):
            baseline = [rec(aid=f"d-a{i}", label="date") for i in range(rng.randint(1, 4))]
            state = state_from_records(baseline)
            log = []
            next_id = 1
            for _ in range(rng.randint(0, 12)):
                aid = rng.choice(sorted(state))
                current = state[aid]
                choice = rng.choice(ACTION_KINDS)
                if choice == "add":
                    payload = {
                        "annotation_id": f"d-m{next_id}",
                        "label": "manual",
                        "text": "x",
                        "box": [0, 0, 5, 5],
                    }
                    action = act("add", payload=payload, action_id=next_id)
                elif choice == "accept" or choice == "reject":
                    action = act(choice, aid=aid, action_id=next_id)
                elif choice == "edit_label":
                    action = act(
                        choice,
                        aid=aid,
                        payload={"old": current.label_id, "new": "renamed"},
                        action_id=next_id,
                    )
                elif choice == "edit_text":
                    action = act(
                        choice,
                        aid=aid,
                        payload={"old": current.value_text, "new": current.value_text + "!"},
                        action_id=next_id,
                    )
                elif choice == "edit_box":
                    new_box = [
                        current.value_box.x1,
                        current.value_box.y1,
                        current.value_box.x2 + 1,
                        current.value_box.y2 + 1,
                    ]
                    action = act(
                        choice,
                        aid=aid,
                        payload={"old": current.value_box.as_list(), "new": new_box},
                        action_id=next_id,
                    )
                else:
                    action = act(
                        choice,
                        aid=aid,
                        payload={"old_label": current.label_id, "new_label": "relinked"},
                        action_id=next_id,
                    )
                try:
                    state = apply_action(state, action)
                except (InvalidTransitionError, NotFoundError):
                    continue  # illegal pick; not logged, state unchanged
                log.append(action)
                next_id += 1
            assert replay(baseline, log) == state, f"trial {trial}"
