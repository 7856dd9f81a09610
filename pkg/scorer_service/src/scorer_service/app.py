"""HTTP layer: four endpoints, JSON bodies, typed error mapping.

Malformed bodies are 400 (not FastAPI's default 422), over-length
inputs 413, word alignment failures 422, anything unexpected 500 —
always as {"error": str}.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .model import MlmScorer, ScorerError


class TokenScoresRequest(BaseModel):
    text: str


class FillMaskRequest(BaseModel):
    text: str
    mask_index: int = Field(ge=0)
    top_k: int = Field(ge=1)


class EmbedRequest(BaseModel):
    text: str


def create_app(scorer: MlmScorer) -> FastAPI:
    app = FastAPI(title="scorer-service", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc.errors())})

    @app.exception_handler(ScorerError)
    async def scorer_error(request: Request, exc: ScorerError):
        return JSONResponse(status_code=exc.status, content={"error": str(exc)})

    @app.exception_handler(Exception)
    async def unexpected(request: Request, exc: Exception):
        return JSONResponse(status_code=500, content={"error": str(exc)})

    @app.get("/v1/info")
    def info():
        return scorer.info()

    @app.post("/v1/token_scores")
    def token_scores(body: TokenScoresRequest):
        return scorer.token_scores(body.text)

    @app.post("/v1/fill_mask")
    def fill_mask(body: FillMaskRequest):
        return scorer.fill_mask(body.text, body.mask_index, body.top_k)

    @app.post("/v1/embed")
    def embed(body: EmbedRequest):
        return scorer.embed(body.text)

    return app
