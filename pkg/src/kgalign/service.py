"""Read-only HTTP service over a loaded graph index.

Endpoints:
  GET  /health -> {"status": "ok", "node_count": N, "edge_count": E}
  POST /align  -> one alignment record (same bytes as the batch CLI emits)

Requests carry the task, the approach and the sample fields; pipeline knobs
(k, max_pairs, top_n, sep_token, providers) are fixed at service startup.
Malformed requests get 400, provider/generator failures get 502. The graph is
immutable, so any number of requests may be served concurrently.
"""

from __future__ import annotations

from dataclasses import replace

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .corpus import CorpusError
from .generator import GeneratorError
from .kgstore import KnowledgeGraph
from .pipeline import APPROACHES, TASKS, PipelineConfig, align_sample, record_to_json
from .pruner import EmbeddingProvider, ProviderError

_STANCE_FIELDS = ("belief", "argument")
_CHOICE_FIELDS = ("premise", "alt1", "alt2")


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=status)


def create_app(
    graph: KnowledgeGraph,
    provider: EmbeddingProvider,
    generator=None,
    defaults: PipelineConfig = PipelineConfig(),
) -> FastAPI:
    app = FastAPI(title="kgalign", docs_url=None, redoc_url=None)

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "node_count": graph.node_count,
            "edge_count": graph.edge_count,
        }

    @app.post("/align")
    async def align(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "request body is not valid JSON")
        if not isinstance(body, dict):
            return _error(400, "request body must be a JSON object")
        task = body.get("task")
        if task not in TASKS:
            return _error(400, f"task must be one of {list(TASKS)}")
        approach = body.get("approach")
        if approach not in APPROACHES:
            return _error(400, f"approach must be one of {list(APPROACHES)}")
        required = _STANCE_FIELDS if task == "stance" else _CHOICE_FIELDS
        for name in required:
            value = body.get(name)
            if not isinstance(value, str) or not value.strip():
                return _error(400, f"field {name!r} must be a non-empty string")
        sample_id = body.get("id", 0)
        cfg = replace(defaults, task=task, approach=approach)
        try:
            record = align_sample(
                graph, body, cfg, provider, generator, sample_id=sample_id
            )
        except (ProviderError, GeneratorError) as exc:
            return _error(502, f"upstream provider failed: {exc}")
        except (CorpusError, ValueError) as exc:
            return _error(400, str(exc))
        return Response(record_to_json(record), media_type="application/json")

    return app
