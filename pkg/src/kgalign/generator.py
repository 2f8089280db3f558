"""Endpoint selection and the client for the external path-generation
service (the generative third alignment approach).

Endpoints are the first entity linked on the query side and the last entity
linked on the answer side, or the first head / last tail of a gold annotation
graph. The service returns a single linearized path per request and no
pruning is applied to it. A deterministic stub stands in for the service in
tests and offline runs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import requests

from .corpus import relation_vocab
from .kgstore import TextTriple, as_text_triples, normalize_label


class GeneratorError(RuntimeError):
    """The generation service failed; carries the originating request."""

    def __init__(self, message: str, request: Optional["GeneratorRequest"] = None):
        super().__init__(message)
        self.request = request


class GeneratorParseError(GeneratorError):
    """The service answered but the response was malformed; the raw body is
    preserved for debugging."""

    def __init__(self, message: str, raw: str, request: Optional["GeneratorRequest"] = None):
        super().__init__(message, request)
        self.raw = raw


@dataclass(frozen=True)
class GeneratorRequest:
    start: str
    end: str


@dataclass(frozen=True)
class GeneratedPath:
    text: str
    parsed: Optional[Tuple[TextTriple, ...]] = None


def select_endpoints_linked(cs_q, cs_a) -> Optional[GeneratorRequest]:
    """First query-side entity and last answer-side entity, by text position;
    absent when either linking came up empty (a broken alignment)."""
    if not cs_q.concepts or not cs_a.concepts:
        return None
    return GeneratorRequest(cs_q.concepts[0].label, cs_a.concepts[-1].label)


def select_endpoints_gold(gold) -> Optional[GeneratorRequest]:
    """Head of the first and tail of the last gold triple, normalized; absent
    for empty gold graphs or endpoints that normalize to nothing."""
    triples = as_text_triples(gold)
    if not triples:
        return None
    start = normalize_label(triples[0].head)
    end = normalize_label(triples[-1].tail)
    if not start or not end:
        return None
    return GeneratorRequest(start, end)


def parse_path_text(text: str, relations: Optional[Sequence[str]] = None) -> Tuple[TextTriple, ...]:
    """Split a linearized path back into triples.

    Segments are comma-separated; within each segment the longest (then
    leftmost) known relation phrase splits head from tail. A segment with no
    recognizable relation becomes a degenerate (segment, "", "") record so the
    quality audit can flag it. Head and tail tokens are preserved verbatim;
    relation phrases are compared on normalized tokens.
    """
    if not text.strip():
        return ()
    if relations is None:
        relations = relation_vocab()
    by_length: dict = {}
    for name in relations:
        toks = tuple(name.split())
        by_length.setdefault(len(toks), set()).add(toks)
    lengths = sorted(by_length, reverse=True)

    out = []
    for segment in text.split(","):
        segment = segment.strip()
        if not segment:
            continue
        raw_tokens = segment.split()
        norm_tokens = [normalize_label(t) for t in raw_tokens]
        found = None
        for length in lengths:
            for start in range(len(raw_tokens) - length + 1):
                if tuple(norm_tokens[start : start + length]) in by_length[length]:
                    found = (start, length)
                    break
            if found:
                break
        if found:
            start, length = found
            out.append(
                TextTriple(
                    " ".join(raw_tokens[:start]),
                    " ".join(raw_tokens[start : start + length]),
                    " ".join(raw_tokens[start + length :]),
                )
            )
        else:
            out.append(TextTriple(segment, "", ""))
    return tuple(out)


def render_generated(triples: Sequence[TextTriple]) -> str:
    """Inverse of parse_path_text up to whitespace."""
    return ", ".join(
        " ".join(part for part in (t.head, t.relation, t.tail) if part) for t in triples
    )


class StubGenerator:
    """Deterministic offline stand-in: one 'related to' hop between the
    requested endpoints."""

    name = "stub"

    def generate(self, request: GeneratorRequest) -> GeneratedPath:
        text = f"{request.start} related to {request.end}"
        return GeneratedPath(text, (TextTriple(request.start, "related to", request.end),))


class RemoteGenerator:
    """Client for the /generate wire protocol: POST {"start", "end"} returns
    {"path": "<linearized path>"}."""

    def __init__(
        self,
        base_url: str,
        timeout: float = 60.0,
        session=None,
        relations: Optional[Sequence[str]] = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.name = f"remote:{self.base_url}"
        self.timeout = timeout
        self._session = session or requests.Session()
        self._relations = relations

    def generate(self, request: GeneratorRequest) -> GeneratedPath:
        try:
            resp = self._session.post(
                f"{self.base_url}/generate",
                json={"start": request.start, "end": request.end},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise GeneratorError(
                f"generation service unreachable for ({request.start} -> {request.end}): {exc}",
                request,
            ) from exc
        if resp.status_code != 200:
            raise GeneratorError(
                f"generation service returned {resp.status_code} for "
                f"({request.start} -> {request.end}): {resp.text[:200]}",
                request,
            )
        try:
            payload = resp.json()
            path_text = payload["path"]
        except (ValueError, KeyError, TypeError) as exc:
            raise GeneratorParseError(
                f"malformed generation response: {exc}", resp.text, request
            ) from exc
        if not isinstance(path_text, str):
            raise GeneratorParseError("path field is not a string", resp.text, request)
        return GeneratedPath(path_text, parse_path_text(path_text, self._relations))
