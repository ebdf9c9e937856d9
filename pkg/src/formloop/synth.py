"""Seeded synthetic form generation.

Used for fuzz tests and demo projects: all randomness flows from the
caller's ``random.Random``, so equal seeds give byte-equal fixtures. Forms
are laid out as a two-column grid of "Key: value" cells, which keeps every
entity on one line with tightly spaced words — the regime the whole
pipeline (and any OCR engine worth using) assumes.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from .ingest import GoldEntitySet, parse_funsd
from .model import BBox, Document, Entity, GenericLabel, Page

KEY_VOCAB = [
    "Name",
    "Date",
    "To",
    "From",
    "Fax Number",
    "Phone Number",
    "Address",
    "City",
    "State",
    "Total",
    "Amount Due",
    "Account No",
    "Email",
    "Subject",
    "Reference",
    "Company",
    "Pages",
    "Order Id",
]
VALUE_VOCAB = [
    "George",
    "Baroody",
    "Acme",
    "Corp",
    "12/10/98",
    "04/02/97",
    "335-7392",
    "(336)",
    "Winston",
    "Salem",
    "NC",
    "27102",
    "120.50",
    "9931",
    "742",
    "Evergreen",
    "Terrace",
    "Monthly",
    "Report",
    "Urgent",
]
NOISE_VOCAB = ["CONFIDENTIAL", "Page", "1", "of", "2", "Internal", "Use", "Only"]

CHAR_W = 7
WORD_H = 18
WORD_GAP = 6
PAIR_GAP = 14


def _word_width(text: str) -> int:
    return CHAR_W * len(text) + 4


def _words_boxes(texts: list[str], x: int, y: int) -> list[dict]:
    words = []
    for text in texts:
        w = _word_width(text)
        words.append({"text": text, "box": [x, y, x + w, y + WORD_H]})
        x += w + WORD_GAP
    return words


def generate_funsd(rng: random.Random, page_width: int = 816, page_height: int = 1056) -> dict:
    """One random form as a FUNSD-style dict (with a page object).

    Always contains at least two linked key-value pairs.
    """
    while True:
        form: list[dict] = []
        links: list[list[int]] = []
        next_id = 0
        columns = (72, 432)
        column_width = 330
        y = 72
        while y + WORD_H < page_height - 72:
            for col_x in columns:
                roll = rng.random()
                if roll < 0.12:
                    continue  # empty cell
                if roll < 0.24:
                    # Stray boilerplate, no key-value structure.
                    texts = rng.sample(NOISE_VOCAB, rng.randint(1, 3))
                    words = _fit(_words_boxes(texts, col_x, y), col_x + column_width)
                    if words:
                        form.append(_entry(next_id, "other", words))
                        next_id += 1
                    continue

                key_texts = rng.choice(KEY_VOCAB).split()
                key_texts[-1] += ":"
                key_words = _fit(_words_boxes(key_texts, col_x, y), col_x + column_width)
                if not key_words:
                    continue
                key_id = next_id
                form.append(_entry(key_id, "question", key_words))
                next_id += 1

                if roll < 0.36:
                    continue  # lone key, stays unlinked

                value_texts = [rng.choice(VALUE_VOCAB) for _ in range(rng.randint(1, 3))]
                value_x = key_words[-1]["box"][2] + PAIR_GAP
                value_words = _fit(
                    _words_boxes(value_texts, value_x, y), col_x + column_width
                )
                if not value_words:
                    continue
                value_id = next_id
                form.append(_entry(value_id, "answer", value_words))
                next_id += 1
                links.append([key_id, value_id])
            y += rng.choice((44, 52, 60))

        if len(links) >= 2:
            break

    for entry in form:
        for pair in links:
            if entry["id"] in pair:
                entry["linking"].append(list(pair))
    return {
        "form": form,
        "page": {"width": page_width, "height": page_height, "image_ref": None},
    }


def _entry(entity_id: int, label: str, words: list[dict]) -> dict:
    x1 = min(w["box"][0] for w in words)
    y1 = min(w["box"][1] for w in words)
    x2 = max(w["box"][2] for w in words)
    y2 = max(w["box"][3] for w in words)
    return {
        "id": entity_id,
        "text": " ".join(w["text"] for w in words),
        "box": [x1, y1, x2, y2],
        "label": label,
        "words": words,
        "linking": [],
    }


def _fit(words: list[dict], right_edge: int) -> list[dict]:
    kept = [w for w in words if w["box"][2] <= right_edge]
    return kept


def random_form(rng: random.Random, doc_id: str) -> tuple[Document, GoldEntitySet]:
    """A random form already run through the interchange parser."""
    return parse_funsd(json.dumps(generate_funsd(rng)), doc_id)


def random_entities(
    rng: random.Random, page: Page, max_entities: int = 12
) -> list[Entity]:
    """Arbitrary labeled boxes for linker fuzzing; geometry is unconstrained
    (overlaps allowed) because the linker must cope with messy layouts."""
    n = rng.randint(1, max_entities)
    entities = []
    for i in range(n):
        w = rng.randint(10, 240)
        h = rng.randint(8, 40)
        x1 = rng.randint(0, page.width - w - 1)
        y1 = rng.randint(0, page.height - h - 1)
        label = rng.choice(
            (GenericLabel.KEY, GenericLabel.KEY, GenericLabel.VALUE, GenericLabel.VALUE, GenericLabel.HEADER)
        )
        entities.append(
            Entity(
                entity_id=i,
                label=label,
                token_indices=(i,),
                text=f"e{i}",
                box=BBox(x1, y1, x1 + w, y1 + h),
            )
        )
    return entities


def write_corpus(
    out_dir: str | Path, count: int, seed: int, render_images: bool = False
) -> list[Path]:
    """Write ``count`` synthetic FUNSD files (and optionally page images)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    paths = []
    for n in range(count):
        doc_id = f"synth-{n:03d}"
        data = generate_funsd(rng)
        if render_images:
            image_name = f"{doc_id}.png"
            data["page"]["image_ref"] = image_name
            document, _ = parse_funsd(json.dumps(data), doc_id)
            render_page(document, out_dir / image_name)
        path = out_dir / f"{doc_id}.json"
        path.write_text(json.dumps(data, ensure_ascii=False, indent=1), encoding="utf-8")
        paths.append(path)
    return paths


def render_page(document: Document, path: str | Path):
    """Draw the document as a plain white page with its words, for the
    review UI to display. Pillow's built-in font keeps this dependency-light."""
    from PIL import Image, ImageDraw

    image = Image.new("RGB", (document.page.width, document.page.height), "white")
    draw = ImageDraw.Draw(image)
    for token in document.tokens:
        box = token.box
        draw.rectangle(
            (box.x1 - 1, box.y1 - 1, box.x2 + 1, box.y2 + 1), outline=(205, 205, 205)
        )
        draw.text((box.x1 + 2, box.y1 + 3), token.text, fill=(20, 20, 20))
    image.save(path, format="PNG")
