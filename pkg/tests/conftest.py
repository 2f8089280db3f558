import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from helpers import ServerThread  # noqa: E402

from kgalign import kgstore  # noqa: E402


@pytest.fixture(scope="session")
def embed_service_url():
    """Base URL of an /embed service for the remote-provider suite.

    Honors KGALIGN_EMBED_URL so the same tests can run unmodified against an
    external deployment (e.g. the embedding sidecar); otherwise a local mock
    backed by the builtin embedder is started for the session.
    """
    override = os.environ.get("KGALIGN_EMBED_URL")
    if override:
        yield override.rstrip("/")
        return

    from fastapi import FastAPI

    from kgalign.pruner import HashedNgramEmbedder

    embedder = HashedNgramEmbedder()
    app = FastAPI()

    @app.post("/embed")
    def embed(body: dict):
        vectors = [v.values.tolist() for v in embedder.embed_batch(body["texts"])]
        return {"dim": embedder.dim, "vectors": vectors}

    with ServerThread(app) as server:
        yield server.base_url


FIXTURE_ROWS = [
    ("church", "at location", "france", 2.0),
    ("coffee", "related to", "cafe"),
    ("coffee", "related to", "catch up"),
    ("cafe", "at location", "downtown"),
    ("bodybuilder", "capable of", "lift weights"),
    ("bodybuilder", "is a", "person"),
    ("lift weights", "has prerequisite", "gym"),
    ("weights", "related to", "gym"),
    ("gym", "is a", "place"),
    ("muscle", "part of", "body"),
    ("makeup", "used for", "hide scar"),
    ("masking tape", "used for", "hide scar"),
    ("masking tape", "is a", "makeup"),
    ("organ transplant", "capable of", "save lives"),
    ("kidney", "part of", "body"),
]


@pytest.fixture(scope="session")
def fixture_graph():
    graph, report = kgstore.ingest(FIXTURE_ROWS)
    assert report.rows_skipped == 0
    return graph
