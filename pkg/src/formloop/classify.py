"""Token classification gateway: gold replay, rule baseline, remote models.

All classifiers produce one :class:`TokenPrediction` per document token.
The remote kind speaks a small HTTP protocol (POST /v1/classify) so any
model can be plugged in behind it; responses are validated hard — index
coverage, label/confidence consistency, sum-to-one — before anything
downstream sees them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import requests

from .errors import GatewayError, ProtocolError
from .ingest import GoldEntitySet
from .layout import median_token_height, token_reading_order
from .model import LABEL_ORDER, Document, Entity, GenericLabel, Token

CONFIDENCE_SUM_TOL = 1e-6
# Entity segmentation: a horizontal gap wider than this many median token
# heights starts a new entity (scale-free across page resolutions).
GAP_FACTOR = 2.0


def argmax_label(confidence: Mapping[GenericLabel, float]) -> GenericLabel:
    """Highest-confidence label; ties broken by the fixed label order."""
    return max(LABEL_ORDER, key=lambda lab: (confidence.get(lab, 0.0), -LABEL_ORDER.index(lab)))


@dataclass(frozen=True)
class TokenPrediction:
    """Per-token label with boundary tag and a 4-way confidence distribution."""

    token_index: int
    label: GenericLabel
    boundary_tag: str
    confidence: Mapping[GenericLabel, float]

    def __post_init__(self):
        if self.boundary_tag not in ("B", "I"):
            raise ValueError(f"boundary_tag must be B or I, got {self.boundary_tag!r}")
        conf = dict(self.confidence)
        if set(conf) != set(LABEL_ORDER):
            raise ValueError(f"confidence must cover exactly {[l.value for l in LABEL_ORDER]}")
        total = sum(conf.values())
        if abs(total - 1.0) > CONFIDENCE_SUM_TOL:
            raise ValueError(f"confidence sums to {total}, not 1")
        if any(v < 0 for v in conf.values()):
            raise ValueError("confidence values must be >= 0")
        if argmax_label(conf) is not self.label:
            raise ValueError(
                f"label {self.label.value} is not the argmax of {conf}"
            )
        object.__setattr__(self, "confidence", conf)

    @property
    def top_confidence(self) -> float:
        return self.confidence[self.label]


def one_hot(label: GenericLabel) -> dict[GenericLabel, float]:
    return {lab: (1.0 if lab is label else 0.0) for lab in LABEL_ORDER}


@dataclass(frozen=True)
class ClassifierKind:
    """Which classifier to run: gold replay, the rule baseline, or remote."""

    name: str
    gold: GoldEntitySet | None = None
    endpoint: str | None = None

    def __post_init__(self):
        if self.name not in ("gold_replay", "rule_based", "remote"):
            raise ValueError(f"unknown classifier kind {self.name!r}")
        if self.name == "gold_replay" and self.gold is None:
            raise ValueError("gold_replay requires a gold entity set")
        if self.name == "remote" and not self.endpoint:
            raise ValueError("remote requires an endpoint")

    @classmethod
    def gold_replay(cls, gold: GoldEntitySet) -> "ClassifierKind":
        return cls(name="gold_replay", gold=gold)

    @classmethod
    def rule_based(cls) -> "ClassifierKind":
        return cls(name="rule_based")

    @classmethod
    def remote(cls, endpoint: str) -> "ClassifierKind":
        return cls(name="remote", endpoint=endpoint)


def classify(document: Document, kind: ClassifierKind) -> list[TokenPrediction]:
    """Produce exactly one prediction per document token."""
    if kind.name == "gold_replay":
        return _classify_gold(document, kind.gold)
    if kind.name == "rule_based":
        return _classify_rule_based(document)
    return _classify_remote(document, kind.endpoint)


def _classify_gold(document: Document, gold: GoldEntitySet) -> list[TokenPrediction]:
    owner: dict[int, tuple[GenericLabel, str]] = {}
    for entity in gold.entities:
        for pos, idx in enumerate(entity.token_indices):
            if idx >= len(document.tokens):
                raise ValueError(f"gold entity {entity.entity_id} references token {idx}")
            owner[idx] = (entity.label, "B" if pos == 0 else "I")
    preds = []
    for tok in document.tokens:
        label, tag = owner.get(tok.index, (GenericLabel.OTHER, "B"))
        preds.append(
            TokenPrediction(tok.index, label, tag, one_hot(label))
        )
    return preds


def _classify_rule_based(document: Document) -> list[TokenPrediction]:
    """Colon baseline: needs no model, not expected to be accurate.

    Per line: leading tokens through the first colon-ending token form a
    key, the rest of the line is its value, and lines with no colon token
    are entirely `other`.
    """
    ordered, line_of = token_reading_order(document.tokens)
    by_line: dict[int, list[int]] = {}
    for idx in ordered:
        by_line.setdefault(line_of[idx], []).append(idx)

    assignment: dict[int, tuple[GenericLabel, str]] = {}
    for line in by_line.values():
        texts = [document.token(i).text for i in line]
        colon_positions = [p for p, t in enumerate(texts) if t.endswith(":")]
        if not colon_positions:
            for idx in line:
                assignment[idx] = (GenericLabel.OTHER, "B")
            continue
        first = colon_positions[0]
        for p in range(first + 1):
            assignment[line[p]] = (GenericLabel.KEY, "B" if p == 0 else "I")
        for p in range(first + 1, len(line)):
            assignment[line[p]] = (GenericLabel.VALUE, "B" if p == first + 1 else "I")

    preds = []
    for tok in document.tokens:
        label, tag = assignment[tok.index]
        preds.append(TokenPrediction(tok.index, label, tag, one_hot(label)))
    return preds


def _classify_remote(document: Document, endpoint: str) -> list[TokenPrediction]:
    if not document.tokens:
        raise ValueError("remote classification needs a non-empty document")
    request_body = {
        "doc_id": document.doc_id,
        "page": {"width": document.page.width, "height": document.page.height},
        "tokens": [
            {"i": t.index, "text": t.text, "box": t.box.as_list()} for t in document.tokens
        ],
    }
    url = endpoint.rstrip("/") + "/v1/classify"
    try:
        response = requests.post(url, json=request_body, timeout=60)
    except requests.RequestException as err:
        raise GatewayError(endpoint, f"request failed: {err}") from err
    if response.status_code != 200:
        raise GatewayError(endpoint, f"HTTP {response.status_code}: {response.text[:200]}")
    try:
        body = response.json()
    except (json.JSONDecodeError, ValueError) as err:
        raise GatewayError(endpoint, f"non-JSON response: {err}") from err
    return parse_protocol_response(body, document)


def parse_protocol_response(body: Mapping, document: Document) -> list[TokenPrediction]:
    """Validate a /v1/classify response body against the wire contract."""
    if not isinstance(body, Mapping):
        raise ProtocolError("response body is not an object")
    if body.get("doc_id") != document.doc_id:
        raise ProtocolError(
            f"response doc_id {body.get('doc_id')!r} != request {document.doc_id!r}"
        )
    raw = body.get("predictions")
    if not isinstance(raw, list):
        raise ProtocolError('response missing "predictions" array')
    if len(raw) != len(document.tokens):
        raise ProtocolError(
            f"response has {len(raw)} predictions for {len(document.tokens)} tokens"
        )
    preds: dict[int, TokenPrediction] = {}
    for item in raw:
        if not isinstance(item, Mapping):
            raise ProtocolError("prediction is not an object")
        idx = item.get("i")
        if not isinstance(idx, int) or not 0 <= idx < len(document.tokens):
            raise ProtocolError(f"prediction index {idx!r} out of range")
        if idx in preds:
            raise ProtocolError(f"duplicate prediction for token {idx}")
        label_name = item.get("label")
        try:
            label = GenericLabel(label_name)
        except ValueError:
            raise ProtocolError(f"unknown label {label_name!r} for token {idx}") from None
        conf_raw = item.get("confidence")
        if not isinstance(conf_raw, Mapping):
            raise ProtocolError(f"token {idx}: missing confidence object")
        try:
            confidence = {lab: float(conf_raw[lab.value]) for lab in LABEL_ORDER}
        except (KeyError, TypeError, ValueError):
            raise ProtocolError(f"token {idx}: confidence must map all four labels") from None
        try:
            pred = TokenPrediction(idx, label, item.get("tag", ""), confidence)
        except ValueError as err:
            raise ProtocolError(f"token {idx}: {err}") from None
        preds[idx] = pred
    return [preds[i] for i in range(len(document.tokens))]


def aggregate_entities(
    document: Document, predictions: Sequence[TokenPrediction]
) -> list[Entity]:
    """Group labeled tokens into entities by walking them in reading order.

    A new entity starts at a B tag, a label change, a line change, or a
    horizontal gap wider than twice the page's median token height.
    Tokens labeled `other` form no entity.
    """
    if len(predictions) != len(document.tokens):
        raise ValueError(
            f"{len(predictions)} predictions for {len(document.tokens)} tokens"
        )
    by_index = {p.token_index: p for p in predictions}
    if set(by_index) != {t.index for t in document.tokens}:
        raise ValueError("predictions must cover each token exactly once")

    ordered, line_of = token_reading_order(document.tokens)
    gap_limit = GAP_FACTOR * median_token_height(document.tokens)

    entities: list[Entity] = []
    run: list[Token] = []
    run_label: GenericLabel | None = None

    def close_run():
        nonlocal run, run_label
        if run:
            entities.append(Entity.from_tokens(len(entities), run_label, run))
        run, run_label = [], None

    prev: Token | None = None
    for idx in ordered:
        tok = document.token(idx)
        pred = by_index[idx]
        if pred.label is GenericLabel.OTHER:
            close_run()
            prev = tok
            continue
        breaks = (
            not run
            or pred.boundary_tag == "B"
            or pred.label is not run_label
            or line_of[prev.index] != line_of[idx]
            or (tok.box.x1 - prev.box.x2) > gap_limit
        )
        if breaks:
            close_run()
            run_label = pred.label
        run.append(tok)
        prev = tok
    close_run()
    return entities
