"""Run the embedding sidecar: ``embed-sidecar --model st:<id> --port 8601``."""

from __future__ import annotations

import argparse
import os
import sys

import uvicorn

from .app import DEFAULT_MAX_BATCH, create_app
from .backends import DEFAULT_MODEL_SPEC, BackendError, load_backend


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="embed-sidecar",
        description="Sentence-embedding service implementing the /embed wire protocol.",
    )
    parser.add_argument(
        "--model",
        default=os.environ.get("EMBED_SIDECAR_MODEL", DEFAULT_MODEL_SPEC),
        help="model spec: st:<sentence-transformers id> or hash:<dim> "
        f"(default {DEFAULT_MODEL_SPEC})",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8601)
    parser.add_argument("--max-batch", type=int, default=DEFAULT_MAX_BATCH)
    args = parser.parse_args(argv)

    try:
        backend = load_backend(args.model)
    except BackendError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"serving model {backend.model_id} (dim {backend.dim}) on {args.host}:{args.port}")
    uvicorn.run(create_app(backend, args.max_batch), host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
