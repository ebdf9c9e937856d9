"""The adapter's token classifier and its protocol-facing label mapping.

The network is deliberately small and self-contained: a linear stack
over hashed text features. It exists to exercise the wire protocol and
the fine-tuning loop with real logits, checkpoints, and gradients, not
to chase benchmark accuracy.
"""

from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import nn

from .features import FEATURE_DIM

# The model's own output space, BIO over FUNSD-style families.
MODEL_LABELS: tuple[str, ...] = (
    "O",
    "B-QUESTION",
    "I-QUESTION",
    "B-ANSWER",
    "I-ANSWER",
    "B-HEADER",
    "I-HEADER",
)

# Wire-protocol label names, in the gateway's tie-break order.
GENERIC_LABELS: tuple[str, ...] = ("key", "value", "header", "other")

DEFAULT_LABEL_MAP: dict[str, str] = {
    "O": "other",
    "B-QUESTION": "key",
    "I-QUESTION": "key",
    "B-ANSWER": "value",
    "I-ANSWER": "value",
    "B-HEADER": "header",
    "I-HEADER": "header",
}

HIDDEN_DIM = 32


@dataclass(frozen=True)
class AdapterConfig:
    """Checkpoint location, bind address, and the model-to-wire label map."""

    checkpoint: str
    host: str = "127.0.0.1"
    port: int = 8500
    label_map: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_LABEL_MAP))

    def __post_init__(self):
        missing = [lab for lab in MODEL_LABELS if lab not in self.label_map]
        if missing:
            raise ValueError(f"label_map must cover every model label, missing {missing}")
        bad = sorted(set(self.label_map.values()) - set(GENERIC_LABELS))
        if bad:
            raise ValueError(f"label_map targets unknown generic labels {bad}")


class TokenClassifierNet(nn.Module):
    def __init__(self):
        super().__init__()
        self.stack = nn.Sequential(
            nn.Linear(FEATURE_DIM, HIDDEN_DIM),
            nn.ReLU(),
            nn.Linear(HIDDEN_DIM, len(MODEL_LABELS)),
        )

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        return self.stack(features)


def new_checkpoint(path: str | Path, seed: int = 0) -> Path:
    """Write a freshly initialized (untrained) checkpoint."""
    torch.manual_seed(seed)
    net = TokenClassifierNet()
    return save_checkpoint(net, path, seed=seed, steps=0)


def save_checkpoint(net: TokenClassifierNet, path: str | Path, seed: int, steps: int) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(
        {
            "format": "formloop-adapter/1",
            "labels": list(MODEL_LABELS),
            "feature_dim": FEATURE_DIM,
            "hidden_dim": HIDDEN_DIM,
            "seed": seed,
            "steps": steps,
            "state_dict": net.state_dict(),
        },
        path,
    )
    return path


def load_checkpoint(path: str | Path) -> TokenClassifierNet:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no checkpoint at {path}")
    payload = torch.load(path, weights_only=True)
    if not isinstance(payload, dict) or payload.get("format") != "formloop-adapter/1":
        raise ValueError(f"{path} is not an adapter checkpoint")
    if payload.get("labels") != list(MODEL_LABELS):
        raise ValueError(f"{path} was trained with a different label space")
    net = TokenClassifierNet()
    net.load_state_dict(payload["state_dict"])
    net.eval()
    return net


def _argmax_generic(confidence: dict[str, float]) -> str:
    """Highest-confidence generic label, ties broken by GENERIC_LABELS order.

    This must match the gateway's recomputation exactly, or responses
    get rejected for label/argmax disagreement.
    """
    best = GENERIC_LABELS[0]
    for lab in GENERIC_LABELS[1:]:
        if confidence[lab] > confidence[best]:
            best = lab
    return best


def predict_wire(
    net: TokenClassifierNet,
    features: torch.Tensor,
    token_indices: list[int],
    label_map: dict[str, str],
) -> list[dict]:
    """Run the model and shape each token's output for the wire protocol.

    Model-space probabilities are summed per generic label and
    renormalized so the four-way distribution sums to one; the reported
    label is the four-way argmax and the tag comes from the strongest
    model variant of that label (bare "O" counts as a segment start).
    """
    with torch.no_grad():
        probs = torch.softmax(net(features), dim=-1).double()

    predictions = []
    for row, index in zip(probs, token_indices):
        by_model = {lab: float(row[k]) for k, lab in enumerate(MODEL_LABELS)}
        confidence = {g: 0.0 for g in GENERIC_LABELS}
        for model_label, p in by_model.items():
            confidence[label_map[model_label]] += p
        total = sum(confidence.values())
        confidence = {g: v / total for g, v in confidence.items()}

        label = _argmax_generic(confidence)
        variants = [lab for lab in MODEL_LABELS if label_map[lab] == label]
        strongest = max(variants, key=lambda lab: (by_model[lab], lab.startswith("B-")))
        tag = "I" if strongest.startswith("I-") else "B"
        predictions.append(
            {"i": index, "label": label, "tag": tag, "confidence": confidence}
        )
    return predictions
