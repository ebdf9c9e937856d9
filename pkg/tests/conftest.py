import json
from pathlib import Path

import pytest

from formloop.cli import bootstrap_project
from formloop.config import ProjectConfig
from formloop.ingest import parse_funsd
from formloop.store import ProjectStore

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fax_text() -> str:
    return (FIXTURES / "fax_mini.json").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def oddballs_text() -> str:
    return (FIXTURES / "oddballs.json").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def fax_tsv_text() -> str:
    return (FIXTURES / "fax_mini.tsv").read_text(encoding="utf-8")


@pytest.fixture
def fax(fax_text):
    return parse_funsd(fax_text, "fax-mini")


@pytest.fixture
def fax_doc(fax):
    return fax[0]


@pytest.fixture
def fax_gold(fax):
    return fax[1]


def build_project(root, docs: dict[str, str], classifier: str = "gold_replay") -> ProjectStore:
    """Init a project, ingest FUNSD texts, and bootstrap it."""
    store = ProjectStore.init(root, "test-project", ProjectConfig(classifier=classifier))
    for doc_id, text in docs.items():
        document, gold = parse_funsd(text, doc_id)
        store.add_document(document)
        store.save_gold(doc_id, gold.entities, gold.links)
    bootstrap_project(store, store.config())
    return store


@pytest.fixture
def fax_project(tmp_path, fax_text) -> ProjectStore:
    return build_project(tmp_path / "proj", {"fax-mini": fax_text})
