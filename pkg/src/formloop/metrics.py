"""Scoring: exact-match entity and linking PRF, plus review effort.

An entity matches when label and token set are both identical; a link
matches when the (key id, value id) pair is identical, which presumes
both sides number entities the same way. ``align_entities`` builds that
shared id space by token-set identity for pipelines that reconstruct
reference entities. A document where both sides are empty scores perfect.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import NotFoundError
from .model import Entity, GenericLabel
from .review import AnnotationState, ReviewAction


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
        }


def _prf(tp: int, fp: int, fn: int) -> PRF:
    if tp == 0 and fp == 0 and fn == 0:
        return PRF(1.0, 1.0, 1.0, 0, 0, 0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    denom = precision + recall
    f1 = 2 * precision * recall / denom if denom > 0 else 0.0
    return PRF(precision, recall, f1, tp, fp, fn)


def micro(parts: Iterable[PRF]) -> PRF:
    tp = fp = fn = 0
    for part in parts:
        tp += part.tp
        fp += part.fp
        fn += part.fn
    return _prf(tp, fp, fn)


def entity_prf(predicted: Sequence[Entity], reference: Sequence[Entity]) -> PRF:
    pred = {(e.label, frozenset(e.token_indices)) for e in predicted}
    ref = {(e.label, frozenset(e.token_indices)) for e in reference}
    tp = len(pred & ref)
    return _prf(tp, len(pred) - tp, len(ref) - tp)


def linking_prf(
    predicted_pairs: Sequence[tuple[int, int]],
    gold_links: Sequence[tuple[int, int]],
    entity_ids: Iterable[int] | None = None,
) -> PRF:
    """Exact-match PRF over (key id, value id) pairs.

    Both pair lists must use the same entity numbering; pass the id
    universe as ``entity_ids`` to have that checked.
    """
    pred = {tuple(p) for p in predicted_pairs}
    gold = {tuple(p) for p in gold_links}
    if entity_ids is not None:
        universe = set(entity_ids)
        for pair in pred | gold:
            if pair[0] not in universe or pair[1] not in universe:
                raise ValueError(f"pair {pair} outside the shared entity id space")
    tp = len(pred & gold)
    return _prf(tp, len(pred) - tp, len(gold) - tp)


def align_entities(
    predicted: Sequence[Entity], reference: Sequence[Entity]
) -> dict[int, int]:
    """Map predicted entity ids to reference ids sharing the token set."""
    by_tokens = {frozenset(e.token_indices): e.entity_id for e in reference}
    mapping = {}
    for entity in predicted:
        ref_id = by_tokens.get(frozenset(entity.token_indices))
        if ref_id is not None:
            mapping[entity.entity_id] = ref_id
    return mapping


# --- review effort ---------------------------------------------------------


def review_effort(
    states: Mapping[str, AnnotationState], actions: Sequence[ReviewAction] = ()
) -> dict:
    """Aggregate review outcomes across documents.

    Each annotation lands in one bucket: ``added`` when it was created by
    a reviewer, otherwise its final status. The automation rate is the
    share of reviewed (non-auto) annotations the human simply accepted;
    with nothing reviewed it is None ("no data").
    """
    added_ids = {
        (a.doc_id, a.payload.get("annotation_id"))
        for a in actions
        if a.kind == "add"
    }
    counts = {"auto": 0, "accepted": 0, "edited": 0, "rejected": 0, "added": 0}
    for doc_id, state in states.items():
        for record in state.values():
            if (doc_id, record.annotation_id) in added_ids:
                counts["added"] += 1
            else:
                counts[record.status.value] += 1
    reviewed = counts["accepted"] + counts["edited"] + counts["rejected"] + counts["added"]
    rate = counts["accepted"] / reviewed if reviewed else None
    fractions = {
        bucket: (counts[bucket] / reviewed if reviewed else None)
        for bucket in ("accepted", "edited", "rejected", "added")
    }
    return {
        "annotations": counts,
        "reviewed": reviewed,
        "pending": counts["auto"],
        "fractions": fractions,
        "automation_rate": rate,
        "docs": len(states),
    }


def project_scores(store) -> dict:
    """Score every bootstrapped document that has reference annotations,
    and summarize review effort overall and per exported iteration."""
    per_doc: dict[str, dict] = {}
    entity_parts: list[PRF] = []
    link_parts: list[PRF] = []
    states: dict[str, AnnotationState] = {}

    for doc_id in store.list_docs():
        if store.has_annotations(doc_id):
            states[doc_id] = store.doc_annotations(doc_id)
        gold = store.load_gold(doc_id)
        if gold is None:
            continue
        try:
            entities, link_result, _, _ = store.load_entities(doc_id)
        except NotFoundError:
            continue  # not bootstrapped yet
        # The pipeline never forms entities out of `other` tokens, so score
        # against the structured part of the reference only.
        gold_entities = [e for e in gold.entities if e.label is not GenericLabel.OTHER]
        gold_links = gold.links

        e = entity_prf(entities, gold_entities)
        # Re-number predicted pairs into the reference id space; endpoints
        # with no token-identical reference entity cannot match anything
        # and are kept as unmatchable sentinels.
        mapping = align_entities(entities, gold_entities)
        remapped = [
            (mapping.get(k, -1 - k), mapping.get(v, -1 - v))
            for k, v in link_result.pairs
        ]
        l = linking_prf(remapped, gold_links)
        entity_parts.append(e)
        link_parts.append(l)
        per_doc[doc_id] = {"entities": e.to_dict(), "linking": l.to_dict()}

    actions = store.read_audit()
    per_iteration = []
    for number in store.iteration_numbers():
        manifest = store.load_manifest(number)
        doc_ids = set(manifest.get("doc_ids", []))
        subset = {d: s for d, s in states.items() if d in doc_ids}
        per_iteration.append(
            {"iteration": number, "effort": review_effort(subset, actions)}
        )

    return {
        "per_doc": per_doc,
        "entities": micro(entity_parts).to_dict() if entity_parts else None,
        "linking": micro(link_parts).to_dict() if link_parts else None,
        "effort": review_effort(states, actions),
        "iterations": per_iteration,
    }


def format_report(scores: dict) -> str:
    """Human-readable text table for the score report."""
    lines = []

    def prf_row(name: str, data: dict | None) -> str:
        if data is None:
            return f"{name:<12} (no reference data)"
        return (
            f"{name:<12} P={data['precision']:.4f} R={data['recall']:.4f} "
            f"F1={data['f1']:.4f} (tp={data['tp']} fp={data['fp']} fn={data['fn']})"
        )

    lines.append(prf_row("entities", scores["entities"]))
    lines.append(prf_row("linking", scores["linking"]))
    for doc_id, row in sorted(scores["per_doc"].items()):
        lines.append(f"  {doc_id}")
        lines.append("  " + prf_row("  entities", row["entities"]))
        lines.append("  " + prf_row("  linking", row["linking"]))
    effort = scores["effort"]
    rate = effort["automation_rate"]
    lines.append(
        "effort       reviewed={reviewed} pending={pending} "
        "accepted={a} edited={e} rejected={r} added={ad}".format(
            reviewed=effort["reviewed"],
            pending=effort["pending"],
            a=effort["annotations"]["accepted"],
            e=effort["annotations"]["edited"],
            r=effort["annotations"]["rejected"],
            ad=effort["annotations"]["added"],
        )
    )
    lines.append(
        "automation   " + ("no data" if rate is None else f"{rate:.4f}")
    )
    return "\n".join(lines)
