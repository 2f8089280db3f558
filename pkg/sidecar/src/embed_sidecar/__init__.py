"""Embedding sidecar: a small HTTP service exposing sentence embeddings over
the /embed wire protocol consumed by the kgalign engine's remote provider."""

__version__ = "0.1.0"

from .app import create_app  # noqa: F401
from .backends import load_backend  # noqa: F401
