"""FastAPI app exposing /embed, /rerank, and /healthz.

The service is stateless between requests: identical inputs yield identical
outputs for a fixed model configuration, and restarting changes nothing.
"""

from __future__ import annotations

import argparse
import logging
import os
import threading

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .encoders import build_embedder, build_reranker

logger = logging.getLogger(__name__)

DEFAULT_BATCH_CAP = 64


class EmbedRequest(BaseModel):
    texts: list[str]


class RerankRequest(BaseModel):
    query: str
    candidates: list[str]


def create_app(embedder=None, reranker=None, batch_cap: int | None = None, defer_loading: bool = False) -> FastAPI:
    """Build the service.

    With ``defer_loading`` the app starts unready (requests get 503) until
    someone runs ``app.state.load_models`` — ``main`` does so in a background
    thread so slow checkpoint loads never block the socket.
    """
    app = FastAPI(title="hetqa model shim")
    app.state.embedder = embedder
    app.state.reranker = reranker
    app.state.batch_cap = batch_cap or int(os.environ.get("HETQA_SHIM_BATCH_CAP", DEFAULT_BATCH_CAP))
    app.state.ready = False

    def load_models():
        if app.state.embedder is None:
            app.state.embedder = build_embedder()
        if app.state.reranker is None:
            app.state.reranker = build_reranker()
        app.state.ready = True
        logger.info("models ready: %s / %s", app.state.embedder.name, app.state.reranker.name)

    app.state.load_models = load_models
    if not defer_loading:
        load_models()

    def not_ready():
        return JSONResponse(status_code=503, content={"error": "models are still loading"})

    @app.get("/healthz")
    def healthz():
        if not app.state.ready:
            return not_ready()
        return {
            "status": "ready",
            "embed_model": app.state.embedder.name,
            "rerank_model": app.state.reranker.name,
            "dim": app.state.embedder.dim,
        }

    @app.post("/embed")
    def embed(request: EmbedRequest):
        if not app.state.ready:
            return not_ready()
        if not request.texts:
            return JSONResponse(status_code=400, content={"error": "empty batch"})
        if len(request.texts) > app.state.batch_cap:
            return JSONResponse(
                status_code=413,
                content={"error": f"batch of {len(request.texts)} exceeds cap {app.state.batch_cap}"},
            )
        vectors = app.state.embedder.encode(request.texts)
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        vectors = vectors / norms
        return {
            "vectors": vectors.tolist(),
            "model": app.state.embedder.name,
            "dim": int(vectors.shape[1]),
        }

    @app.post("/rerank")
    def rerank(request: RerankRequest):
        if not app.state.ready:
            return not_ready()
        if not request.candidates:
            return JSONResponse(status_code=400, content={"error": "empty candidates"})
        scores = app.state.reranker.score(request.query, request.candidates)
        return {"scores": [float(s) for s in scores], "model": app.state.reranker.name}

    return app


def main(argv=None) -> int:
    import uvicorn

    parser = argparse.ArgumentParser(prog="hetqa-shim", description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8091)
    args = parser.parse_args(argv)
    logging.basicConfig(level=os.environ.get("HETQA_LOG", "INFO"))
    app = create_app(defer_loading=True)
    threading.Thread(target=app.state.load_models, daemon=True).start()
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
