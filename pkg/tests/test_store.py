import json
import random

import pytest

from formloop.annotate import AnnotationStatus
from formloop.config import LinkConfig, ProjectConfig
from formloop.errors import (
    InvalidTransitionError,
    NotFoundError,
    StoreError,
)
from formloop.model import BBox
from formloop.store import (
    ProjectStore,
    document_from_dict,
    document_to_dict,
    entity_from_dict,
    entity_to_dict,
    link_result_from_dict,
    link_result_to_dict,
    prediction_from_dict,
    prediction_to_dict,
)
from formloop.synth import random_form

from conftest import build_project


class TestSerializers:
    def test_document_roundtrip_on_random_forms(self):
        rng = random.Random(11)
        for _ in range(5):
            doc, _ = random_form(rng, f"doc-{rng.random()}")
            assert document_from_dict(document_to_dict(doc)) == doc

    def test_entity_link_prediction_roundtrip(self, fax_project):
        entities, links, predictions, classifier = fax_project.load_entities("fax-mini")
        assert classifier == "gold_replay"
        for e in entities:
            assert entity_from_dict(entity_to_dict(e)) == e
        assert link_result_from_dict(link_result_to_dict(links)) == links
        for p in predictions:
            assert prediction_from_dict(prediction_to_dict(p)) == p


class TestLifecycle:
    def test_init_creates_layout(self, tmp_path):
        store = ProjectStore.init(tmp_path / "p", "demo", ProjectConfig())
        assert (tmp_path / "p" / "project.json").exists()
        assert (tmp_path / "p" / "audit.log").exists()
        assert store.name == "demo"
        assert store.list_docs() == []

    def test_init_refuses_existing_project(self, tmp_path):
        ProjectStore.init(tmp_path / "p", "demo", ProjectConfig())
        with pytest.raises(StoreError, match="already"):
            ProjectStore.init(tmp_path / "p", "again", ProjectConfig())

    def test_open_requires_project(self, tmp_path):
        with pytest.raises(StoreError, match="not a project"):
            ProjectStore.open(tmp_path / "nope")

    def test_config_roundtrip(self, tmp_path):
        store = ProjectStore.init(tmp_path / "p", "demo", ProjectConfig())
        cfg = ProjectConfig(
            classifier="rule_based",
            link=LinkConfig(vertical_weight=2.0, max_link_distance_ratio=None),
            uncertainty="min_margin",
        )
        store.set_config(cfg)
        assert ProjectStore.open(tmp_path / "p").config() == cfg

    def test_schema_starts_absent(self, tmp_path):
        store = ProjectStore.init(tmp_path / "p", "demo", ProjectConfig())
        assert store.schema() is None


class TestDocuments:
    def test_add_and_load(self, tmp_path, fax_doc):
        store = ProjectStore.init(tmp_path / "p", "demo", ProjectConfig())
        store.add_document(fax_doc)
        assert store.list_docs() == ["fax-mini"]
        assert store.has_doc("fax-mini")
        assert store.load_document("fax-mini") == fax_doc
        assert store.image_path("fax-mini") is None

    def test_duplicate_add_refused(self, tmp_path, fax_doc):
        store = ProjectStore.init(tmp_path / "p", "demo", ProjectConfig())
        store.add_document(fax_doc)
        with pytest.raises(StoreError, match="already ingested"):
            store.add_document(fax_doc)

    def test_image_copied_and_referenced(self, tmp_path, fax_doc):
        img = tmp_path / "scan.png"
        img.write_bytes(b"\x89PNG\r\n\x1a\nfake")
        store = ProjectStore.init(tmp_path / "p", "demo", ProjectConfig())
        store.add_document(fax_doc, image_path=img)
        path = store.image_path("fax-mini")
        assert path is not None and path.name == "image.png"
        assert path.read_bytes() == img.read_bytes()
        assert store.load_document("fax-mini").page.image_ref == "image.png"

    def test_load_missing(self, tmp_path):
        store = ProjectStore.init(tmp_path / "p", "demo", ProjectConfig())
        with pytest.raises(NotFoundError):
            store.load_document("ghost")

    def test_gold_roundtrip(self, tmp_path, fax):
        doc, gold = fax
        store = ProjectStore.init(tmp_path / "p", "demo", ProjectConfig())
        store.add_document(doc)
        assert store.load_gold("fax-mini") is None
        store.save_gold("fax-mini", gold.entities, gold.links)
        loaded = store.load_gold("fax-mini")
        assert loaded.entities == gold.entities
        assert loaded.links == gold.links


class TestBootstrappedProject:
    def test_baseline_and_annotations_written(self, fax_project):
        baseline = fax_project.load_baseline("fax-mini")
        assert [r.annotation_id for r in baseline] == [
            "fax-mini-a0",
            "fax-mini-a1",
            "fax-mini-a2",
        ]
        assert all(r.status is AnnotationStatus.AUTO for r in baseline)
        annotations = json.loads(
            (fax_project.doc_dir("fax-mini") / "annotations.json").read_text()
        )
        assert len(annotations["annotations"]) == 3

    def test_schema_induced(self, fax_project):
        schema = fax_project.schema()
        assert sorted(schema.label_ids()) == ["date", "fax_number", "to"]

    def test_has_annotations(self, fax_project):
        assert fax_project.has_annotations("fax-mini")


class TestCommitAction:
    def test_accept_persists_everywhere(self, fax_project):
        action, state = fax_project.commit_action("fax-mini", "accept", "fax-mini-a0", {})
        assert action.action_id == 1
        assert state["fax-mini-a0"].status is AnnotationStatus.ACCEPTED
        # The log has the action; the materialized view reflects it; a
        # fresh store instance (process restart) replays identically.
        assert [a.action_id for a in fax_project.read_audit()] == [1]
        materialized = json.loads(
            (fax_project.doc_dir("fax-mini") / "annotations.json").read_text()
        )
        by_id = {r["id"]: r for r in materialized["annotations"]}
        assert by_id["fax-mini-a0"]["status"] == "accepted"
        reopened = ProjectStore.open(fax_project.root)
        assert reopened.doc_annotations("fax-mini") == state

    def test_invalid_transition_leaves_log_untouched(self, fax_project):
        fax_project.commit_action("fax-mini", "accept", "fax-mini-a0", {})
        before = (fax_project.root / "audit.log").read_text()
        with pytest.raises(InvalidTransitionError):
            fax_project.commit_action("fax-mini", "accept", "fax-mini-a0", {})
        assert (fax_project.root / "audit.log").read_text() == before

    def test_unknown_doc(self, fax_project):
        with pytest.raises(NotFoundError):
            fax_project.commit_action("ghost", "accept", "x", {})

    def test_action_ids_monotonic(self, fax_project):
        a1, _ = fax_project.commit_action("fax-mini", "accept", "fax-mini-a0", {})
        a2, _ = fax_project.commit_action("fax-mini", "reject", "fax-mini-a1", {})
        a3, _ = fax_project.commit_action(
            "fax-mini",
            "edit_text",
            "fax-mini-a2",
            {"old": "(336) 335-7392", "new": "(336) 335-7000"},
        )
        assert [a1.action_id, a2.action_id, a3.action_id] == [1, 2, 3]

    def test_add_action(self, fax_project):
        payload = {
            "annotation_id": "fax-mini-m0",
            "label": "po_number",
            "text": "4411",
            "box": [10, 200, 80, 224],
        }
        _, state = fax_project.commit_action("fax-mini", "add", None, payload)
        assert state["fax-mini-m0"].value_text == "4411"

    def test_baseline_file_never_changes(self, fax_project):
        before = (fax_project.doc_dir("fax-mini") / "baseline.json").read_text()
        fax_project.commit_action("fax-mini", "accept", "fax-mini-a0", {})
        assert (fax_project.doc_dir("fax-mini") / "baseline.json").read_text() == before


class TestAuditLog:
    def test_append_only_across_restarts(self, fax_project):
        fax_project.commit_action("fax-mini", "accept", "fax-mini-a0", {})
        first = (fax_project.root / "audit.log").read_text()
        store2 = ProjectStore.open(fax_project.root)
        store2.commit_action("fax-mini", "reject", "fax-mini-a1", {})
        second = (fax_project.root / "audit.log").read_text()
        assert second.startswith(first)
        assert len(second.splitlines()) == 2

    def test_corrupt_line_reported_with_position(self, fax_project):
        with (fax_project.root / "audit.log").open("a") as handle:
            handle.write("{not json\n")
        with pytest.raises(StoreError, match="line 1"):
            fax_project.read_audit()

    def test_doc_filter(self, tmp_path, fax_text):
        # Two copies of the same form under different ids.
        store = build_project(tmp_path / "p", {"a": fax_text, "b": fax_text})
        store.commit_action("a", "accept", "a-a0", {})
        store.commit_action("b", "accept", "b-a0", {})
        store.commit_action("a", "accept", "a-a1", {})
        assert [a.action_id for a in store.read_audit("a")] == [1, 3]
        assert [a.action_id for a in store.read_audit("b")] == [2]


class TestIterations:
    def test_write_then_read(self, fax_project):
        number = fax_project.next_iteration_number()
        assert number == 1
        manifest = {"iteration": 1, "doc_ids": ["fax-mini"], "files": ["docs/fax-mini.json"]}
        fax_project.write_iteration(1, manifest, {"docs/fax-mini.json": "{}"})
        assert fax_project.iteration_numbers() == [1]
        assert fax_project.load_manifest(1)["doc_ids"] == ["fax-mini"]
        assert fax_project.exported_doc_ids() == {"fax-mini"}
        assert fax_project.next_iteration_number() == 2

    def test_duplicate_refused(self, fax_project):
        fax_project.write_iteration(1, {"iteration": 1}, {})
        with pytest.raises(StoreError, match="already"):
            fax_project.write_iteration(1, {"iteration": 1}, {})

    def test_missing_manifest(self, fax_project):
        with pytest.raises(NotFoundError):
            fax_project.load_manifest(7)
