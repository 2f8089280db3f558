"""The /embed service.

  GET  /health -> {"status": "ok", "model": <id>, "dim": <int>}
  POST /embed {"texts": [str, ...]} -> {"dim": <int>, "vectors": [[float], ...]}

Vectors are L2-normalized, one per input text, in request order. Malformed
bodies get 400; batches over the configured limit get 413. The backend is
loaded before the app is constructed, so a broken model configuration fails
at startup instead of producing a half-ready service.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .backends import EmbeddingBackend

DEFAULT_MAX_BATCH = 256


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=status)


def create_app(backend: EmbeddingBackend, max_batch: int = DEFAULT_MAX_BATCH) -> FastAPI:
    app = FastAPI(title="embed-sidecar", docs_url=None, redoc_url=None)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "model": backend.model_id, "dim": backend.dim}

    @app.post("/embed")
    async def embed(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "request body is not valid JSON")
        if not isinstance(body, dict) or "texts" not in body:
            return _error(400, "request must be a JSON object with a 'texts' field")
        texts = body["texts"]
        if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
            return _error(400, "'texts' must be a list of strings")
        if len(texts) > max_batch:
            return _error(413, f"batch of {len(texts)} exceeds the limit of {max_batch}")
        return {"dim": backend.dim, "vectors": backend.encode(texts)}

    return app
