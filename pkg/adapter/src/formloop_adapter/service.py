"""HTTP surface: POST /v1/classify, validated by hand so every
malformed request comes back as a 400 with a readable reason."""

import json

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .features import batch_features
from .model import DEFAULT_LABEL_MAP, MODEL_LABELS, TokenClassifierNet, predict_wire


class BadRequest(Exception):
    pass


def _check(condition: bool, message: str):
    if not condition:
        raise BadRequest(message)


def validate_request(body) -> tuple[str, int, int, list[dict]]:
    """Pick apart a /v1/classify body; BadRequest on the first problem."""
    _check(isinstance(body, dict), "request body must be a JSON object")
    doc_id = body.get("doc_id")
    _check(isinstance(doc_id, str) and doc_id != "", 'request needs a non-empty "doc_id"')

    page = body.get("page")
    _check(isinstance(page, dict), 'request needs a "page" object')
    width, height = page.get("width"), page.get("height")
    _check(
        isinstance(width, int) and isinstance(height, int) and width > 0 and height > 0,
        "page width and height must be positive integers",
    )

    tokens = body.get("tokens")
    _check(isinstance(tokens, list), 'request needs a "tokens" array')
    _check(len(tokens) > 0, "tokens must not be empty")
    seen = set()
    for tok in tokens:
        _check(isinstance(tok, dict), "each token must be an object")
        index = tok.get("i")
        _check(isinstance(index, int) and index >= 0, f"token index {index!r} is invalid")
        _check(index not in seen, f"duplicate token index {index}")
        seen.add(index)
        _check(isinstance(tok.get("text"), str), f"token {index} needs a text string")
        box = tok.get("box")
        _check(
            isinstance(box, list)
            and len(box) == 4
            and all(isinstance(v, (int, float)) for v in box),
            f"token {index} needs a 4-number box",
        )
        _check(box[0] <= box[2] and box[1] <= box[3], f"token {index} box corners are inverted")
    return doc_id, width, height, tokens


def build_app(net: TokenClassifierNet, label_map: dict[str, str] | None = None) -> FastAPI:
    label_map = dict(label_map or DEFAULT_LABEL_MAP)
    app = FastAPI(title="formloop-adapter")

    @app.get("/health")
    def health():
        return {"status": "ok", "model_labels": list(MODEL_LABELS)}

    @app.post("/v1/classify")
    async def classify(request: Request):
        try:
            body = json.loads(await request.body())
        except (json.JSONDecodeError, UnicodeDecodeError) as err:
            return JSONResponse(status_code=400, content={"error": f"invalid JSON: {err}"})
        try:
            doc_id, width, height, tokens = validate_request(body)
        except BadRequest as err:
            return JSONResponse(status_code=400, content={"error": str(err)})
        features = batch_features(tokens, width, height)
        predictions = predict_wire(net, features, [t["i"] for t in tokens], label_map)
        return {"doc_id": doc_id, "predictions": predictions}

    return app
