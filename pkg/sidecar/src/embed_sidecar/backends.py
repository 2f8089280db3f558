"""Embedding backends behind one tiny interface.

The model is configuration, not code: a spec string selects the backend.
``st:<model-id>`` loads a sentence-transformers model (the production
choice for paper-style similarity numbers); ``hash:<dim>`` is a
deterministic, dependency-free character n-gram embedder for offline
deployments and tests. A bare spec is treated as a sentence-transformers
model id.
"""

from __future__ import annotations

import hashlib
from typing import List, Protocol, Sequence

import numpy as np

DEFAULT_MODEL_SPEC = "st:sentence-transformers/all-mpnet-base-v2"


class BackendError(RuntimeError):
    """The configured model could not be loaded."""


class EmbeddingBackend(Protocol):
    model_id: str
    dim: int

    def encode(self, texts: Sequence[str]) -> List[List[float]]: ...


def _l2_normalize(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return matrix / norms


class HashedCharGramBackend:
    """Character n-grams (3..5) hashed into a fixed-size term-frequency
    vector, L2-normalized; fully deterministic across processes."""

    def __init__(self, dim: int = 1024):
        if dim < 8:
            raise BackendError(f"hash backend needs dim >= 8, got {dim}")
        self.dim = dim
        self.model_id = f"hash:{dim}"

    @staticmethod
    def _bucket(gram: str, dim: int) -> int:
        digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little") % dim

    def encode(self, texts: Sequence[str]) -> List[List[float]]:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            prepared = " ".join(text.lower().split())
            if 0 < len(prepared) < 3:
                # too short for any n-gram: hash the whole text once
                out[row, self._bucket(prepared, self.dim)] = 1.0
                continue
            for n in (3, 4, 5):
                for i in range(len(prepared) - n + 1):
                    out[row, self._bucket(prepared[i : i + n], self.dim)] += 1.0
        return _l2_normalize(out).tolist()


class SentenceTransformerBackend:
    """Real sentence-embedding model via sentence-transformers."""

    def __init__(self, model_id: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise BackendError(
                "sentence-transformers is not installed; install the 'st' extra "
                "or use a hash:<dim> model spec"
            ) from exc
        try:
            self._model = SentenceTransformer(model_id)
        except Exception as exc:
            raise BackendError(f"cannot load model {model_id!r}: {exc}") from exc
        self.model_id = model_id
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: Sequence[str]) -> List[List[float]]:
        vectors = self._model.encode(
            list(texts), normalize_embeddings=True, convert_to_numpy=True
        )
        return np.asarray(vectors, dtype=np.float64).tolist()


def load_backend(spec: str = DEFAULT_MODEL_SPEC) -> EmbeddingBackend:
    """Build the backend named by a model spec string."""
    if spec.startswith("hash:"):
        try:
            dim = int(spec.split(":", 1)[1])
        except ValueError as exc:
            raise BackendError(f"bad hash model spec {spec!r}") from exc
        return HashedCharGramBackend(dim)
    if spec.startswith("st:"):
        return SentenceTransformerBackend(spec.split(":", 1)[1])
    return SentenceTransformerBackend(spec)
