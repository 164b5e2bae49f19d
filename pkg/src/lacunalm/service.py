"""HTTP facade over predict/rank for the workbench UI and scripts.

Stateless by construction: the model set is fixed at startup, checkpoints are
immutable, and no request mutates server state, so concurrent identical
requests return identical bodies. Every non-2xx response carries an ApiError
body {code, message, detail}.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from .checkpoint import LoadedModel
from .corpus import parse_line
from .errors import (
    LengthMismatch,
    MarkupError,
    NoGapPresent,
    QueryError,
)
from .model import filled_text, predict_distributions
from .ranking import RankQuery, rank_candidates


class PredictRequest(BaseModel):
    model_id: str
    text: str
    top_k: int = 10


class RankRequest(BaseModel):
    model_id: str
    text: str
    candidates: list[str]


class UnknownModel(KeyError):
    pass


def _api_error(status: int, code: str, message: str, detail: str = "") -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "detail": detail},
    )


def create_app(models: dict[str, LoadedModel], cors_origins: list[str] | None = None) -> FastAPI:
    app = FastAPI(title="lacunalm", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def get_model(model_id: str) -> LoadedModel:
        if model_id not in models:
            raise UnknownModel(model_id)
        return models[model_id]

    @app.exception_handler(UnknownModel)
    async def unknown_model_handler(request: Request, exc: UnknownModel):
        return _api_error(404, "UnknownModel", f"no loaded model {exc.args[0]!r}")

    @app.exception_handler(MarkupError)
    @app.exception_handler(QueryError)
    @app.exception_handler(NoGapPresent)
    @app.exception_handler(LengthMismatch)
    async def query_error_handler(request: Request, exc: Exception):
        return _api_error(400, type(exc).__name__, str(exc))

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return _api_error(400, "InvalidRequest", "request body failed validation", str(exc))

    @app.exception_handler(StarletteHTTPException)
    async def http_error_handler(request: Request, exc: StarletteHTTPException):
        code = "NotFound" if exc.status_code == 404 else "HttpError"
        return _api_error(exc.status_code, code, str(exc.detail))

    @app.get("/models")
    def list_models():
        return [
            {
                "id": m.id,
                "masking": m.training.get("policy", "unknown"),
                "config": m.config.to_dict(),
                "dev_accuracy": m.training.get("dev_accuracy"),
            }
            for m in models.values()
        ]

    @app.post("/predict")
    def predict(req: PredictRequest):
        loaded = get_model(req.model_id)
        sentence = parse_line(req.text)
        prediction = predict_distributions(sentence, loaded.model, loaded.vocabulary)
        chars = prediction.greedy_chars(loaded.vocabulary)
        top = prediction.top_k(loaded.vocabulary, k=req.top_k)
        return {
            "filled_text": filled_text(sentence, chars),
            "positions": [
                {
                    "index": pos,
                    "top_k": [{"char": ch, "log_prob": lp} for ch, lp in entries],
                }
                for pos, entries in zip(prediction.positions, top)
            ],
        }

    @app.post("/rank")
    def rank(req: RankRequest):
        loaded = get_model(req.model_id)
        sentence = parse_line(req.text)
        ranked = rank_candidates(
            RankQuery(sentence, tuple(req.candidates)), loaded.model, loaded.vocabulary
        )
        return {
            "ranked": [
                {"text": r.text, "log_prob": r.log_prob, "rank": r.rank} for r in ranked
            ]
        }

    return app
