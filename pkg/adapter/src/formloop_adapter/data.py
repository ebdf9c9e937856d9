"""Minimal FUNSD-format reader for training data.

The adapter deliberately keeps its own small reader instead of
importing the annotation tool's package: iteration exports are a
documented file format, and that file format is the entire contract
between the two sides.
"""

import json
from pathlib import Path

FUNSD_TO_FAMILY = {
    "question": "QUESTION",
    "answer": "ANSWER",
    "header": "HEADER",
    "other": "O",
}


def _family(entry: dict) -> str:
    """Map an entity's label to a model label family, via the generic
    fallback when the primary label is document-specific."""
    for candidate in (entry.get("label"), entry.get("generic_label")):
        if candidate in FUNSD_TO_FAMILY:
            return FUNSD_TO_FAMILY[candidate]
    raise ValueError(f"entity {entry.get('id')} has no recognizable label: {entry.get('label')!r}")


def read_training_file(path: Path) -> dict:
    """One FUNSD file -> {"tokens": [{text, box, label}], "page": (w, h)}.

    Token labels are model-space BIO strings ("B-QUESTION", ..., "O").
    """
    data = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(data, dict) or not isinstance(data.get("form"), list):
        raise ValueError(f"{path.name}: not a FUNSD annotation file")

    tokens = []
    max_x = max_y = 1
    for entry in data["form"]:
        family = _family(entry)
        words = [w for w in entry.get("words", []) if str(w.get("text", "")).strip()]
        for pos, word in enumerate(words):
            box = [float(v) for v in word["box"]]
            if family == "O":
                label = "O"
            else:
                label = ("B-" if pos == 0 else "I-") + family
            tokens.append({"text": str(word["text"]), "box": box, "label": label})
            max_x = max(max_x, int(box[2]))
            max_y = max(max_y, int(box[3]))

    if not tokens:
        raise ValueError(f"{path.name}: no usable tokens")
    page = data.get("page", {})
    width = int(page.get("width", max_x))
    height = int(page.get("height", max_y))
    return {"tokens": tokens, "page": (width, height)}


def read_export_dir(export_dir: str | Path) -> list[dict]:
    """All FUNSD files under a directory, in sorted filename order."""
    export_dir = Path(export_dir)
    if not export_dir.is_dir():
        raise FileNotFoundError(f"export directory {export_dir} does not exist")
    files = sorted(export_dir.glob("*.json"))
    if not files:
        raise ValueError(f"export directory {export_dir} contains no FUNSD files")
    return [read_training_file(path) for path in files]
