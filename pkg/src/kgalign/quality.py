"""Graph-quality auditing: broken-triple detection and corpus statistics.

A triple is broken when it misses a head or tail entity, when more than one
edge connects the same endpoint pair, or (at the sample level) when an
alignment produced nothing at all. A sample with any broken triple counts as
broken once. Reports aggregate the average triple count, the broken-sample
fraction and the average cosine similarity between each sample's context and
its linearization.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence

from .kgstore import normalize_label
from .pruner import EmbeddingProvider, cosine


class BrokenReason(str, Enum):
    MISSING_ENDPOINT = "missing_endpoint"
    MULTI_EDGE = "multi_edge"
    EMPTY_RESULT = "empty_result"


def _triple_fields(record):
    """(head, relation-or-relations, tail) from a TextTriple, dict or tuple."""
    if isinstance(record, dict):
        return record.get("head", ""), record.get("relation", ""), record.get("tail", "")
    head = getattr(record, "head", None)
    if head is not None:
        return head, getattr(record, "relation", ""), getattr(record, "tail", "")
    return record[0], record[1], record[2]


def audit_triple(record) -> Optional[BrokenReason]:
    """Check one triple-like record; the relation field may carry a list of
    relations for a pre-grouped multi-edge record."""
    head, relation, tail = _triple_fields(record)
    if not str(head).strip() or not str(tail).strip():
        return BrokenReason.MISSING_ENDPOINT
    if isinstance(relation, (list, tuple)) and len(relation) > 1:
        return BrokenReason.MULTI_EDGE
    return None


def _pair_key(record):
    head, _, tail = _triple_fields(record)
    a = normalize_label(str(head))
    b = normalize_label(str(tail))
    return (a, b) if a <= b else (b, a)


def audit_sample(triples: Sequence) -> Optional[BrokenReason]:
    """Audit one sample's aligned triples; empty results are broken, and the
    first broken triple in order determines the reason."""
    triples = list(triples)
    if not triples:
        return BrokenReason.EMPTY_RESULT
    pair_counts = Counter(_pair_key(t) for t in triples)
    for t in triples:
        reason = audit_triple(t)
        if reason is not None:
            return reason
        if pair_counts[_pair_key(t)] > 1:
            return BrokenReason.MULTI_EDGE
    return None


@dataclass(frozen=True)
class QualityReport:
    approach: str
    avg_triples: float
    broken_fraction: float
    avg_similarity: float
    sample_count: int


def _record_parts(record):
    if isinstance(record, dict):
        return (
            record.get("context", ""),
            record.get("linearization", ""),
            record.get("triples", []) or [],
        )
    return (
        getattr(record, "context", ""),
        getattr(record, "linearization", ""),
        getattr(record, "triples", []) or [],
    )


def report(records: Iterable, approach: str, provider: EmbeddingProvider) -> QualityReport:
    """Aggregate alignment records into a QualityReport.

    Averages use exact summation so the result is invariant to sample order;
    empty linearizations contribute 0.0 similarity (zero-vector convention).
    """
    contexts: List[str] = []
    linearizations: List[str] = []
    triple_counts: List[int] = []
    broken = 0
    for record in records:
        context, linearization, triples = _record_parts(record)
        contexts.append(context)
        linearizations.append(linearization)
        triple_counts.append(len(triples))
        if audit_sample(triples) is not None:
            broken += 1
    n = len(contexts)
    if n == 0:
        raise ValueError("cannot report on an empty dataset")
    vectors = provider.embed_batch(contexts + linearizations)
    similarities = [cosine(vectors[i], vectors[n + i]) for i in range(n)]
    return QualityReport(
        approach=approach,
        avg_triples=math.fsum(triple_counts) / n,
        broken_fraction=broken / n,
        avg_similarity=math.fsum(similarities) / n,
        sample_count=n,
    )


_TABLE_COLUMNS = ("approach", "avg_triples", "broken_fraction", "avg_similarity", "sample_count")


def render_table(reports: Sequence[QualityReport]) -> str:
    """Tab-separated table, one row per approach; floats at 4 decimals (the
    JSON records keep full precision)."""
    lines = ["\t".join(_TABLE_COLUMNS)]
    for r in reports:
        lines.append(
            "\t".join(
                (
                    r.approach,
                    f"{r.avg_triples:.4f}",
                    f"{r.broken_fraction:.4f}",
                    f"{r.avg_similarity:.4f}",
                    str(r.sample_count),
                )
            )
        )
    return "\n".join(lines) + "\n"


def report_records(reports: Sequence[QualityReport]) -> str:
    """JSON-lines rendering with full float precision."""
    return "".join(json.dumps(asdict(r), sort_keys=True) + "\n" for r in reports)
