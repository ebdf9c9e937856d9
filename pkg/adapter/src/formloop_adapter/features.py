"""Token featurization: hashed character trigrams plus box geometry.

Everything here must be deterministic across processes, so hashing uses
crc32 rather than Python's salted hash().
"""

import zlib

import torch

HASH_DIM = 64
GEOMETRY_DIM = 7
FEATURE_DIM = HASH_DIM + GEOMETRY_DIM


def _trigrams(text: str) -> list[str]:
    padded = f"^{text.lower()}$"
    if len(padded) < 3:
        return [padded]
    return [padded[i : i + 3] for i in range(len(padded) - 2)]


def token_features(text: str, box: list[float], page_w: int, page_h: int) -> torch.Tensor:
    """One fixed-width feature vector per token."""
    vec = torch.zeros(FEATURE_DIM)
    grams = _trigrams(text)
    for gram in grams:
        bucket = zlib.crc32(gram.encode("utf-8")) % HASH_DIM
        vec[bucket] += 1.0
    norm = float(vec[:HASH_DIM].norm())
    if norm > 0:
        vec[:HASH_DIM] /= norm

    x1, y1, x2, y2 = box
    geo = torch.tensor(
        [
            (x1 + x2) / 2.0 / page_w,
            (y1 + y2) / 2.0 / page_h,
            (x2 - x1) / page_w,
            (y2 - y1) / page_h,
            1.0 if text.endswith(":") else 0.0,
            1.0 if any(c.isdigit() for c in text) else 0.0,
            min(len(text), 20) / 20.0,
        ]
    )
    vec[HASH_DIM:] = geo
    return vec


def batch_features(tokens: list[dict], page_w: int, page_h: int) -> torch.Tensor:
    return torch.stack(
        [token_features(t["text"], t["box"], page_w, page_h) for t in tokens]
    )
