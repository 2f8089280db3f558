"""Candidate pruning: linearize paths to text and rank them by embedding
cosine similarity against the original context.

The built-in provider hashes character n-grams (n=3..5) into a fixed
1024-dimensional term-frequency vector and L2-normalizes it. It is fully
deterministic across processes and platforms (blake2b bucketing), so the test
suite needs no model runtime; real sentence-embedding models plug in through
the remote provider's wire protocol (POST /embed, see docs/FORMATS.md).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, List, Optional, Protocol, Sequence, Tuple

import numpy as np
import requests

from .kgstore import TextTriple, as_text_triples

BUILTIN_DIM = 1024
_NGRAM_MIN = 3
_NGRAM_MAX = 5


class ProviderError(RuntimeError):
    """An embedding provider failed (network, protocol or shape mismatch)."""


@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    values: np.ndarray
    dim: int

    @property
    def is_zero(self) -> bool:
        """True for non-normalizable inputs (empty or sub-n-gram text)."""
        return not bool(np.any(self.values))


class EmbeddingProvider(Protocol):
    name: str
    dim: Optional[int]

    def embed_batch(self, texts: Sequence[str]) -> List[EmbeddingVector]: ...


def _bucket(gram: str, dim: int) -> int:
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % dim


class HashedNgramEmbedder:
    """Deterministic character n-gram embedder; unit L2 norm for any text
    long enough to produce at least one 3-gram, zero vector otherwise."""

    name = "hashed-ngram-v1"

    def __init__(self, dim: int = BUILTIN_DIM):
        self.dim = dim

    def embed_one(self, text: str) -> EmbeddingVector:
        vec = np.zeros(self.dim, dtype=np.float64)
        prepared = " ".join(text.lower().split())
        length = len(prepared)
        if 0 < length < _NGRAM_MIN:
            # too short for any n-gram: hash the whole text as one gram so
            # every non-empty input still gets a unit-norm vector
            vec[_bucket(prepared, self.dim)] = 1.0
            return EmbeddingVector(vec, self.dim)
        for n in range(_NGRAM_MIN, _NGRAM_MAX + 1):
            for i in range(length - n + 1):
                vec[_bucket(prepared[i : i + n], self.dim)] += 1.0
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return EmbeddingVector(vec, self.dim)

    def embed_batch(self, texts: Sequence[str]) -> List[EmbeddingVector]:
        return [self.embed_one(t) for t in texts]


class RemoteEmbedder:
    """Client for the /embed wire protocol; the vector dimension is pinned on
    first response and any later drift is a provider error."""

    def __init__(self, base_url: str, timeout: float = 30.0, session=None):
        self.base_url = base_url.rstrip("/")
        self.name = f"remote:{self.base_url}"
        self.dim: Optional[int] = None
        self.timeout = timeout
        self._session = session or requests.Session()

    def embed_batch(self, texts: Sequence[str]) -> List[EmbeddingVector]:
        texts = list(texts)
        try:
            resp = self._session.post(
                f"{self.base_url}/embed", json={"texts": texts}, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise ProviderError(f"embedding service unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderError(
                f"embedding service returned {resp.status_code}: {resp.text[:200]}"
            )
        try:
            payload = resp.json()
            dim = int(payload["dim"])
            vectors = payload["vectors"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderError(f"malformed embedding response: {exc}") from exc
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise ProviderError(
                f"embedding service returned {len(vectors)} vectors for {len(texts)} texts"
            )
        if self.dim is None:
            self.dim = dim
        elif dim != self.dim:
            raise ProviderError(f"embedding dim changed from {self.dim} to {dim}")
        out = []
        for vec in vectors:
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (dim,):
                raise ProviderError(f"vector of shape {arr.shape} does not match dim {dim}")
            if not np.all(np.isfinite(arr)):
                raise ProviderError("embedding service returned non-finite values")
            out.append(EmbeddingVector(arr, dim))
        return out


class FallbackEmbedder:
    """Wraps a primary provider with a fallback used only on provider errors;
    opt-in, because silently mixing embedding spaces is usually wrong."""

    def __init__(self, primary, fallback):
        self.primary = primary
        self.fallback = fallback
        self.name = f"{primary.name}+fallback:{fallback.name}"

    @property
    def dim(self):
        return self.primary.dim if self.primary.dim is not None else self.fallback.dim

    def embed_batch(self, texts: Sequence[str]) -> List[EmbeddingVector]:
        try:
            return self.primary.embed_batch(texts)
        except ProviderError:
            return self.fallback.embed_batch(texts)


def embed(provider: EmbeddingProvider, text: str) -> EmbeddingVector:
    return provider.embed_batch([text])[0]


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Standard cosine in [-1, 1]; zero vectors compare as 0.0 by convention
    (empty linearizations from failed alignments land here)."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} != {b.dim}")
    if a.is_zero or b.is_zero:
        return 0.0
    value = float(
        np.dot(a.values, b.values) / (np.linalg.norm(a.values) * np.linalg.norm(b.values))
    )
    return max(-1.0, min(1.0, value))


@dataclass(frozen=True, eq=False)
class LinearizedGraph:
    text: str
    source: object = None


def render_triple(triple: TextTriple) -> str:
    return " ".join(part for part in (triple.head, triple.relation, triple.tail) if part)


def linearize(source) -> LinearizedGraph:
    """Render triples as "head relation tail" joined by ", ", in path order.

    Accepts a Path, Subgraph, or any iterable of (head, relation, tail)
    records; direction flags do not affect the rendering."""
    triples = as_text_triples(source)
    return LinearizedGraph(", ".join(render_triple(t) for t in triples), source)


def prune(
    candidates: Sequence,
    context: str,
    provider: EmbeddingProvider,
    top_n: int = 1,
) -> List[Tuple[object, float]]:
    """Top ``top_n`` candidates by cosine similarity of their linearization
    to the context, sorted descending; ties keep the earlier candidate."""
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    candidates = list(candidates)
    if not candidates:
        return []
    texts = [linearize(c).text for c in candidates]
    vectors = provider.embed_batch([context] + texts)
    context_vec = vectors[0]
    scores = [cosine(context_vec, v) for v in vectors[1:]]
    order = sorted(range(len(candidates)), key=lambda i: (-scores[i], i))
    return [(candidates[i], scores[i]) for i in order[:top_n]]
