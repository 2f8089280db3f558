"""End-to-end alignment of task samples.

One code path serves both the batch CLI and the read-only HTTP service, so
identical inputs produce byte-identical records. A record captures the full
trace of one sample: linked concept sets, the selected triples, their
linearization and score, the broken-triple audit and the classifier-ready
formatted sequence(s). Failures of a single sample are recorded, never
raised, so batch runs always complete.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, List, Optional, Sequence

from .corpus import (
    ChoiceSample,
    CorpusError,
    GoldGraph,
    StanceSample,
    format_choice,
    format_stance,
    parse_gold_graph,
    select_best_graph,
)
from .generator import (
    GeneratorError,
    select_endpoints_gold,
    select_endpoints_linked,
)
from .kgstore import KnowledgeGraph, TextTriple
from .linker import ANSWER_SIDE, QUERY_SIDE, ConceptSet, build_query, link_basic, link_enhanced
from .pathfinder import PathQueryConfig, find_paths
from .pruner import EmbeddingProvider, linearize, prune
from .quality import audit_sample

APPROACHES = ("basic", "enhanced", "generated", "generated_gold", "gold", "none")
TASKS = ("stance", "choice")


@dataclass(frozen=True)
class PipelineConfig:
    task: str = "stance"
    approach: str = "enhanced"
    k: int = 3
    max_pairs: int = 64
    per_pair_paths: int = 1
    top_n: int = 1
    max_ngram: int = 4
    sep_token: str = "[SEP]"

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.approach not in APPROACHES:
            raise ValueError(f"approach must be one of {APPROACHES}, got {self.approach!r}")
        if self.top_n < 1:
            raise ValueError("top_n must be >= 1")
        if not self.sep_token:
            raise ValueError("sep_token must be non-empty")

    def path_config(self) -> PathQueryConfig:
        return PathQueryConfig(k=self.k, max_pairs=self.max_pairs, per_pair_paths=self.per_pair_paths)


def as_sample(task: str, data):
    """Coerce a mapping (e.g. a service request body) into a task sample;
    dataclass samples pass through. Gold graphs given as serialized strings
    are parsed here."""
    if isinstance(data, (StanceSample, ChoiceSample)):
        return data
    if not isinstance(data, dict):
        raise CorpusError(f"sample must be a mapping or sample object, got {type(data).__name__}")
    if task == "stance":
        gold = data.get("gold_graph", ())
        if isinstance(gold, str):
            gold = parse_gold_graph(gold)
        return StanceSample(
            belief=data.get("belief", ""),
            argument=data.get("argument", ""),
            stance=data.get("stance"),
            gold_graph=tuple(gold),
        )
    graphs = []
    for gi, g in enumerate(data.get("gold_graphs", []) or []):
        if not isinstance(g, dict) or "triples" not in g or "ratings" not in g:
            raise CorpusError(f"gold graph {gi} must carry 'triples' and 'ratings'")
        triples = g["triples"]
        if isinstance(triples, str):
            triples = parse_gold_graph(triples)
        ratings = tuple(float(r) for r in g["ratings"])
        if not ratings:
            raise CorpusError(f"gold graph {gi} has no ratings")
        graphs.append(GoldGraph(tuple(triples), ratings))
    return ChoiceSample(
        premise=data.get("premise", ""),
        alt1=data.get("alt1", ""),
        alt2=data.get("alt2", ""),
        correct=data.get("correct"),
        gold_graphs=tuple(graphs),
    )


def _gold_triples(sample) -> tuple:
    if isinstance(sample, StanceSample):
        return tuple(sample.gold_graph)
    return tuple(select_best_graph(sample))


def _concept_records(cs: ConceptSet) -> list:
    return [
        {"id": c.concept, "label": c.label, "span": [c.span[0], c.span[1]]} for c in cs.concepts
    ]


def _triple_records(triples: Sequence[TextTriple]) -> list:
    return [
        {"head": t.head, "relation": t.relation, "tail": t.tail, "reversed": t.reversed}
        for t in triples
    ]


def align_sample(
    graph: KnowledgeGraph,
    sample,
    cfg: PipelineConfig,
    provider: EmbeddingProvider,
    generator=None,
    sample_id=0,
) -> dict:
    """Align one sample and return its record.

    Raises ValueError/CorpusError for invalid samples and propagates provider
    and generator errors; batch callers wrap this (see align_dataset) while
    the service maps the exceptions to 400/502 responses.
    """
    sample = as_sample(cfg.task, sample)
    query = build_query(sample)
    empty_q = ConceptSet((), QUERY_SIDE)
    empty_a = ConceptSet((), ANSWER_SIDE)
    q_set, a_set = empty_q, empty_a
    triples: Sequence[TextTriple] = ()
    lin_text = ""
    score: Optional[float] = None

    if cfg.approach in ("basic", "enhanced"):
        if cfg.approach == "basic":
            q_set = link_basic(query.q_text, graph, side=QUERY_SIDE)
            a_set = link_basic(query.a_text, graph, side=ANSWER_SIDE)
        else:
            q_set = link_enhanced(query.q_text, graph, cfg.max_ngram, side=QUERY_SIDE)
            a_set = link_enhanced(query.a_text, graph, cfg.max_ngram, side=ANSWER_SIDE)
        candidates = find_paths(graph, q_set, a_set, cfg.path_config())
        ranked = prune(candidates, query.context, provider, top_n=cfg.top_n)
        if ranked:
            best, score = ranked[0]
            triples = best.text_triples
            lin_text = linearize(best).text
    elif cfg.approach in ("generated", "generated_gold"):
        if generator is None:
            raise ValueError(f"approach {cfg.approach!r} requires a generator")
        if cfg.approach == "generated":
            q_set = link_enhanced(query.q_text, graph, cfg.max_ngram, side=QUERY_SIDE)
            a_set = link_enhanced(query.a_text, graph, cfg.max_ngram, side=ANSWER_SIDE)
            request = select_endpoints_linked(q_set, a_set)
        else:
            request = select_endpoints_gold(_gold_triples(sample))
        if request is not None:
            generated = generator.generate(request)
            triples = generated.parsed or ()
            lin_text = generated.text
    elif cfg.approach == "gold":
        triples = _gold_triples(sample)
        lin_text = linearize(triples).text
    # approach "none": no graph by design

    broken = audit_sample(triples)
    if query.task == "stance":
        formatted = [format_stance(sample.belief, sample.argument, lin_text, cfg.sep_token)]
    else:
        formatted = [
            format_choice(sample.premise, lin_text, sample.alt1, cfg.sep_token),
            format_choice(sample.premise, lin_text, sample.alt2, cfg.sep_token),
        ]

    return {
        "id": sample_id,
        "task": query.task,
        "approach": cfg.approach,
        "context": query.context,
        "q_concepts": _concept_records(q_set),
        "a_concepts": _concept_records(a_set),
        "triples": _triple_records(triples),
        "linearization": lin_text,
        "score": score,
        "broken": broken.value if broken is not None else None,
        "formatted": formatted,
    }


def record_to_json(record: dict) -> str:
    """Canonical serialization shared by the CLI and the service; byte-stable
    for identical records."""
    return json.dumps(record, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def align_dataset(
    graph: KnowledgeGraph,
    samples: Iterable,
    cfg: PipelineConfig,
    provider: EmbeddingProvider,
    generator=None,
    workers: int = 1,
) -> Iterator[dict]:
    """Align a dataset in sample order; per-sample failures become error
    records instead of aborting the batch."""

    def one(args) -> dict:
        idx, sample = args
        try:
            return align_sample(graph, sample, cfg, provider, generator, sample_id=idx)
        except Exception as exc:  # recorded, never fatal for the batch
            return {
                "id": idx,
                "task": cfg.task,
                "approach": cfg.approach,
                "error": f"{type(exc).__name__}: {exc}",
            }

    indexed = list(enumerate(samples))
    if workers <= 1:
        for item in indexed:
            yield one(item)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(one, indexed)
