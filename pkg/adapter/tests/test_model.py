import pytest
import torch

from formloop_adapter.features import FEATURE_DIM, batch_features, token_features
from formloop_adapter.model import (
    DEFAULT_LABEL_MAP,
    GENERIC_LABELS,
    MODEL_LABELS,
    AdapterConfig,
    TokenClassifierNet,
    load_checkpoint,
    new_checkpoint,
    predict_wire,
)

TOKENS = [
    {"i": 0, "text": "Date:", "box": [10, 10, 60, 30]},
    {"i": 1, "text": "12/10/98", "box": [70, 10, 150, 30]},
    {"i": 2, "text": "stray", "box": [10, 50, 60, 70]},
]


def test_features_are_deterministic_and_fixed_width():
    a = token_features("Total:", [10, 10, 80, 28], 800, 600)
    b = token_features("Total:", [10, 10, 80, 28], 800, 600)
    assert a.shape == (FEATURE_DIM,)
    assert torch.equal(a, b)


def test_features_distinguish_text_and_geometry():
    base = token_features("Total:", [10, 10, 80, 28], 800, 600)
    other_text = token_features("Amount:", [10, 10, 80, 28], 800, 600)
    other_box = token_features("Total:", [400, 300, 470, 318], 800, 600)
    assert not torch.equal(base, other_text)
    assert not torch.equal(base, other_box)


def test_label_map_must_be_total():
    partial = {lab: "other" for lab in MODEL_LABELS[:-1]}
    with pytest.raises(ValueError, match="must cover"):
        AdapterConfig(checkpoint="x.pt", label_map=partial)


def test_label_map_targets_must_be_generic():
    bad = dict(DEFAULT_LABEL_MAP, O="junk")
    with pytest.raises(ValueError, match="unknown generic"):
        AdapterConfig(checkpoint="x.pt", label_map=bad)


def test_default_label_map_is_total():
    AdapterConfig(checkpoint="x.pt")  # must not raise
    assert set(DEFAULT_LABEL_MAP) == set(MODEL_LABELS)
    assert set(DEFAULT_LABEL_MAP.values()) == set(GENERIC_LABELS)


def test_checkpoint_roundtrip_preserves_outputs(tmp_path):
    path = new_checkpoint(tmp_path / "m.pt", seed=3)
    net = load_checkpoint(path)
    features = batch_features(TOKENS, 800, 600)
    first = net(features)
    again = load_checkpoint(path)(features)
    assert torch.equal(first, again)


def test_same_seed_same_checkpoint(tmp_path):
    a = load_checkpoint(new_checkpoint(tmp_path / "a.pt", seed=5))
    b = load_checkpoint(new_checkpoint(tmp_path / "b.pt", seed=5))
    c = load_checkpoint(new_checkpoint(tmp_path / "c.pt", seed=6))
    features = batch_features(TOKENS, 800, 600)
    assert torch.equal(a(features), b(features))
    assert not torch.equal(a(features), c(features))


def test_load_checkpoint_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_checkpoint(tmp_path / "nope.pt")


def test_load_checkpoint_rejects_foreign_file(tmp_path):
    path = tmp_path / "junk.pt"
    torch.save({"weights": [1, 2, 3]}, path)
    with pytest.raises(ValueError, match="not an adapter checkpoint"):
        load_checkpoint(path)


def test_predict_wire_shapes_and_sums(tmp_path):
    net = load_checkpoint(new_checkpoint(tmp_path / "m.pt", seed=1))
    features = batch_features(TOKENS, 800, 600)
    preds = predict_wire(net, features, [t["i"] for t in TOKENS], DEFAULT_LABEL_MAP)
    assert [p["i"] for p in preds] == [0, 1, 2]
    for pred in preds:
        conf = pred["confidence"]
        assert set(conf) == set(GENERIC_LABELS)
        assert abs(sum(conf.values()) - 1.0) < 1e-9
        assert all(v >= 0 for v in conf.values())
        assert pred["tag"] in ("B", "I")
        # The reported label is the tie-broken four-way argmax.
        best = max(conf.values())
        firsts = [lab for lab in GENERIC_LABELS if conf[lab] == best]
        assert pred["label"] == firsts[0]
