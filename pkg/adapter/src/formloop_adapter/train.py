"""Fine-tuning entry point: iteration export in, checkpoint out.

Hyperparameters are plain arguments with modest defaults; the point is
a correct, reproducible loop rather than leaderboard accuracy. Fully
seeded, so a rerun with the same inputs reproduces the same losses bit
for bit on CPU.
"""

from pathlib import Path

import torch
from torch import nn

from .data import read_export_dir
from .features import batch_features
from .model import MODEL_LABELS, TokenClassifierNet, load_checkpoint, save_checkpoint

LABEL_INDEX = {lab: k for k, lab in enumerate(MODEL_LABELS)}


def fine_tune(
    export_dir: str | Path,
    out_path: str | Path,
    base_checkpoint: str | Path | None = None,
    epochs: int = 3,
    lr: float = 0.05,
    seed: int = 0,
) -> tuple[Path, list[float]]:
    """Train on every FUNSD file in export_dir; returns (checkpoint, losses).

    Losses are one entry per optimization step (one step per document
    per epoch, in sorted filename order).
    """
    if epochs < 1:
        raise ValueError("epochs must be at least 1")
    docs = read_export_dir(export_dir)

    torch.manual_seed(seed)
    if base_checkpoint is not None:
        net = load_checkpoint(base_checkpoint)
    else:
        net = TokenClassifierNet()
    net.train()

    batches = []
    for doc in docs:
        width, height = doc["page"]
        features = batch_features(doc["tokens"], width, height)
        targets = torch.tensor([LABEL_INDEX[t["label"]] for t in doc["tokens"]])
        batches.append((features, targets))

    optimizer = torch.optim.Adam(net.parameters(), lr=lr)
    criterion = nn.CrossEntropyLoss()
    losses: list[float] = []
    for _ in range(epochs):
        for features, targets in batches:
            optimizer.zero_grad()
            loss = criterion(net(features), targets)
            loss.backward()
            optimizer.step()
            losses.append(loss.item())

    net.eval()
    path = save_checkpoint(net, out_path, seed=seed, steps=len(losses))
    return path, losses
