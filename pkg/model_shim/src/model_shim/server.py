"""HTTP server implementing the classifier wire protocol.

POST /classify {"model_id", "texts"} -> {"model_id", "distributions"}
POST /train   {"config", "train_texts", "train_labels",
               "val_texts", "val_labels"} -> {"model_id"}

Malformed classify bodies get 400; train requests with bad configs or
labels outside the taxonomy get 422; requests before the base model has
loaded get 503. Training runs are serialized, classification is not.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .model import ShimModel, TrainSettings, fine_tune, infer_label_order, load_base

_CONFIG_FIELDS = {
    "max_seq_len": int,
    "batch_size": int,
    "learning_rate": (int, float),
    "optimizer_name": str,
    "loss_name": str,
    "early_stopping": bool,
}


class _BadRequest(Exception):
    def __init__(self, status: int, detail: str):
        self.status = status
        self.detail = detail


def _require_texts(value, name: str, status: int) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(t, str) for t in value):
        raise _BadRequest(status, f"{name} must be an array of strings")
    return value


def _parse_settings(config, max_epochs: int, patience: int) -> TrainSettings:
    if not isinstance(config, dict):
        raise _BadRequest(422, "config must be an object")
    for name, kind in _CONFIG_FIELDS.items():
        if name not in config:
            raise _BadRequest(422, f"config missing field: {name}")
        value = config[name]
        # bool is an int subclass; reject True where a count is expected.
        if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
            raise _BadRequest(422, f"config field {name} has wrong type")
    if config["max_seq_len"] <= 0 or config["batch_size"] <= 0 or config["learning_rate"] <= 0:
        raise _BadRequest(422, "config numerics must be positive")
    if config["optimizer_name"] != "AdamW":
        raise _BadRequest(422, f"unsupported optimizer: {config['optimizer_name']}")
    if config["loss_name"] != "CrossEntropy":
        raise _BadRequest(422, f"unsupported loss: {config['loss_name']}")
    return TrainSettings(
        max_seq_len=config["max_seq_len"],
        batch_size=config["batch_size"],
        learning_rate=config["learning_rate"],
        early_stopping=config["early_stopping"],
        max_epochs=max_epochs,
        patience=patience,
    )


def create_app(
    checkpoint_dir,
    preload: bool = True,
    max_epochs: int | None = None,
    patience: int | None = None,
) -> FastAPI:
    """App bound to one checkpoint; the base model registers as "default"."""
    from .model import DEFAULT_MAX_EPOCHS, DEFAULT_PATIENCE

    app = FastAPI(title="model-shim")
    models: dict[str, ShimModel] = {}
    train_lock = threading.Lock()
    counter = {"n": 0}
    caps = (max_epochs or DEFAULT_MAX_EPOCHS, patience or DEFAULT_PATIENCE)

    def load() -> None:
        models["default"] = load_base(checkpoint_dir)

    app.state.load = load
    if preload:
        load()

    @app.exception_handler(_BadRequest)
    def bad_request(_, exc: _BadRequest):
        return JSONResponse(status_code=exc.status, content={"detail": exc.detail})

    async def _json_body(request: Request, status: int) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise _BadRequest(status, "body is not valid JSON") from None
        if not isinstance(body, dict):
            raise _BadRequest(status, "body must be a JSON object")
        return body

    @app.post("/classify")
    async def classify(request: Request):
        body = await _json_body(request, 400)
        model_id = body.get("model_id")
        if not isinstance(model_id, str):
            raise _BadRequest(400, "model_id must be a string")
        texts = _require_texts(body.get("texts"), "texts", 400)
        if not models:
            raise _BadRequest(503, "model is still loading")
        model = models.get(model_id)
        if model is None:
            raise _BadRequest(404, f"unknown model_id: {model_id}")
        return {"model_id": model_id, "distributions": model.classify(texts)}

    @app.post("/train")
    async def train(request: Request):
        body = await _json_body(request, 400)
        settings = _parse_settings(body.get("config"), *caps)
        train_texts = _require_texts(body.get("train_texts"), "train_texts", 422)
        val_texts = _require_texts(body.get("val_texts"), "val_texts", 422)
        train_labels = body.get("train_labels")
        val_labels = body.get("val_labels")
        for name, labels, texts in (
            ("train_labels", train_labels, train_texts),
            ("val_labels", val_labels, val_texts),
        ):
            if not isinstance(labels, list) or not all(isinstance(l, str) for l in labels):
                raise _BadRequest(422, f"{name} must be an array of strings")
            if len(labels) != len(texts):
                raise _BadRequest(422, f"{name} length does not match its texts")
        if not train_texts or not val_texts:
            raise _BadRequest(422, "train and validation sets must be non-empty")
        label_order = infer_label_order(train_labels + val_labels)
        if label_order is None:
            raise _BadRequest(422, "labels outside the task taxonomy")
        if not models:
            raise _BadRequest(503, "model is still loading")

        with train_lock:
            trained = fine_tune(
                checkpoint_dir,
                settings,
                train_texts,
                train_labels,
                val_texts,
                val_labels,
                label_order,
            )
            counter["n"] += 1
            model_id = f"shim-{counter['n']:04d}"
            models[model_id] = trained
        return {"model_id": model_id}

    return app
