import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from formloop_adapter.model import load_checkpoint, new_checkpoint
from formloop_adapter.service import build_app

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
# Shared wire-protocol contract, owned by the gateway side.
PROTOCOL = HERE.parent.parent / "tests" / "fixtures" / "protocol"


@pytest.fixture(scope="session")
def contract() -> dict:
    return json.loads((PROTOCOL / "contract.json").read_text(encoding="utf-8"))


def load_protocol_case(name: str) -> dict:
    return json.loads((PROTOCOL / name).read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory) -> Path:
    return new_checkpoint(tmp_path_factory.mktemp("ckpt") / "model.pt", seed=11)


@pytest.fixture(scope="session")
def client(checkpoint) -> TestClient:
    return TestClient(build_app(load_checkpoint(checkpoint)))
