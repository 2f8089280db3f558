"""Dataset loading, resplitting, gold-graph parsing and classifier-ready
sequence formatting for the stance and plausible-alternative tasks.

File formats (documented in docs/FORMATS.md): stance samples are
tab-separated with columns belief, argument, stance, gold_graph; choice
samples are JSON-lines objects with premise, alt1, alt2, correct, graphs.
Gold graphs serialize as "(head; relation; tail)(head; relation; tail)...";
relation labels are validated against the bundled ConceptNet relation
vocabulary (data/relations.txt, one label per line) and unknown relations
warn but are kept.
"""

from __future__ import annotations

import json
import logging
import math
import random
import warnings
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import List, Optional, Sequence, Tuple

from .kgstore import TextTriple, normalize_label

logger = logging.getLogger(__name__)

STANCE_LABELS = ("support", "counter")


class CorpusError(ValueError):
    """Invalid dataset content or invalid corpus operation input."""


class GoldGraphParseError(CorpusError):
    """Malformed gold-graph serialization; carries the character offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class UnknownRelationWarning(UserWarning):
    """A gold triple uses a relation outside the bundled vocabulary."""


@lru_cache(maxsize=1)
def relation_vocab() -> frozenset:
    """The bundled ConceptNet relation vocabulary, normalized."""
    text = resources.files("kgalign").joinpath("data").joinpath("relations.txt").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


@dataclass
class StanceSample:
    belief: str
    argument: str
    stance: Optional[str] = None
    gold_graph: Tuple[TextTriple, ...] = ()


@dataclass
class GoldGraph:
    triples: Tuple[TextTriple, ...]
    ratings: Tuple[float, ...]


@dataclass
class ChoiceSample:
    premise: str
    alt1: str
    alt2: str
    correct: Optional[int] = None
    gold_graphs: Tuple[GoldGraph, ...] = ()


def parse_gold_graph(
    text: str, vocab: Optional[frozenset] = None, warn_unknown: bool = True
) -> Tuple[TextTriple, ...]:
    """Parse "(h; r; t)(h; r; t)..." into an ordered triple list.

    Head and tail strings are kept verbatim (trimmed); unbalanced parentheses
    or an arity other than 3 raise GoldGraphParseError with the offset of the
    offending triple.
    """
    if vocab is None:
        vocab = relation_vocab()
    triples = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch != "(":
            raise GoldGraphParseError(f"expected '(' but found {ch!r}", i)
        close = text.find(")", i + 1)
        if close == -1:
            raise GoldGraphParseError("unbalanced '(': no closing parenthesis", i)
        inner = text[i + 1 : close]
        if "(" in inner:
            raise GoldGraphParseError("nested '(' inside triple", i)
        parts = [p.strip() for p in inner.split(";")]
        if len(parts) != 3:
            raise GoldGraphParseError(f"triple has arity {len(parts)}, expected 3", i)
        head, relation, tail = parts
        if warn_unknown and normalize_label(relation) not in vocab:
            warnings.warn(
                f"relation {relation!r} is not in the relation vocabulary",
                UnknownRelationWarning,
                stacklevel=2,
            )
        triples.append(TextTriple(head, relation, tail))
        i = close + 1
    return tuple(triples)


def render_gold_graph(triples: Sequence[TextTriple]) -> str:
    """Inverse of parse_gold_graph for well-formed triple lists."""
    return "".join(f"({t.head}; {t.relation}; {t.tail})" for t in triples)


def select_best_graph(sample: ChoiceSample) -> Tuple[TextTriple, ...]:
    """The gold graph with the highest mean annotator rating; ties take the
    lowest index."""
    if not sample.gold_graphs:
        raise CorpusError("choice sample has no gold graphs")
    best_idx = -1
    best_mean = -math.inf
    for idx, graph in enumerate(sample.gold_graphs):
        if not graph.ratings:
            raise CorpusError(f"gold graph {idx} has no ratings")
        mean = math.fsum(graph.ratings) / len(graph.ratings)
        if mean > best_mean:
            best_mean = mean
            best_idx = idx
    return sample.gold_graphs[best_idx].triples


def resplit_stance(samples: Sequence, seed: int) -> Tuple[list, list, list]:
    """Seeded shuffle of the combined samples, split 80/10/10 at floor
    boundaries; deterministic per seed, partitions disjoint and exhaustive."""
    items = list(samples)
    n = len(items)
    if n < 10:
        raise CorpusError(f"need at least 10 samples to resplit, got {n}")
    rng = random.Random(seed)
    rng.shuffle(items)
    a = n * 8 // 10
    b = n * 9 // 10
    train, dev, test = items[:a], items[a:b], items[b:]
    for name, part in (("train", train), ("dev", dev), ("test", test)):
        dist = Counter(getattr(s, "stance", None) for s in part)
        logger.info("resplit %s: %d samples, label distribution %s", name, len(part), dict(dist))
    return train, dev, test


def split_choice(dev_samples: Sequence, test_samples: Sequence) -> Tuple[list, list, list]:
    """Official dev becomes training data; the official test is halved in
    order into new dev/test (an odd leftover goes to test)."""
    if not dev_samples or not test_samples:
        raise CorpusError("both the dev and test splits must be non-empty")
    test = list(test_samples)
    half = len(test) // 2
    return list(dev_samples), test[:half], test[half:]


def format_stance(belief: str, argument: str, graph_text: str, sep_token: str) -> str:
    """"<belief> <sep> <argument> <sep> <graph> <sep>"; without a graph the
    trailing graph segment is dropped."""
    if not sep_token:
        raise ValueError("sep_token must be non-empty")
    if graph_text:
        return f"{belief} {sep_token} {argument} {sep_token} {graph_text} {sep_token}"
    return f"{belief} {sep_token} {argument} {sep_token}"


def format_choice(premise: str, graph_text: str, alternative: str, sep_token: str) -> str:
    """"<premise> <graph> <sep> <alternative> <sep>"; an empty graph collapses
    the double space."""
    if not sep_token:
        raise ValueError("sep_token must be non-empty")
    if graph_text:
        return f"{premise} {graph_text} {sep_token} {alternative} {sep_token}"
    return f"{premise} {sep_token} {alternative} {sep_token}"


def load_stance_dataset(path) -> List[StanceSample]:
    samples = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 4:
                raise CorpusError(f"{path}:{lineno}: expected 4 tab-separated columns, got {len(cols)}")
            belief, argument, stance, gold = cols
            if not belief.strip() or not argument.strip():
                raise CorpusError(f"{path}:{lineno}: belief and argument must be non-empty")
            if stance not in STANCE_LABELS:
                raise CorpusError(f"{path}:{lineno}: stance must be one of {STANCE_LABELS}, got {stance!r}")
            samples.append(StanceSample(belief, argument, stance, parse_gold_graph(gold)))
    return samples


def _ratings(raw, where: str) -> Tuple[float, ...]:
    if not isinstance(raw, list) or not raw:
        raise CorpusError(f"{where}: ratings must be a non-empty list")
    out = []
    for r in raw:
        try:
            value = float(r)
        except (TypeError, ValueError):
            raise CorpusError(f"{where}: rating {r!r} is not a number") from None
        if not math.isfinite(value):
            raise CorpusError(f"{where}: rating {r!r} is not finite")
        out.append(value)
    return tuple(out)


def load_choice_dataset(path) -> List[ChoiceSample]:
    samples = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{where}: invalid JSON: {exc}") from exc
            for key in ("premise", "alt1", "alt2", "correct", "graphs"):
                if key not in obj:
                    raise CorpusError(f"{where}: missing field {key!r}")
            if obj["correct"] not in (1, 2):
                raise CorpusError(f"{where}: correct must be 1 or 2, got {obj['correct']!r}")
            graphs = obj["graphs"]
            if not isinstance(graphs, list) or not graphs:
                raise CorpusError(f"{where}: graphs must be a non-empty list")
            gold = []
            for gi, g in enumerate(graphs):
                triples_raw = g.get("triples")
                if not isinstance(triples_raw, str):
                    raise CorpusError(f"{where}: graph {gi} triples must be a serialized string")
                gold.append(
                    GoldGraph(
                        parse_gold_graph(triples_raw),
                        _ratings(g.get("ratings"), f"{where} graph {gi}"),
                    )
                )
            samples.append(
                ChoiceSample(
                    str(obj["premise"]),
                    str(obj["alt1"]),
                    str(obj["alt2"]),
                    int(obj["correct"]),
                    tuple(gold),
                )
            )
    return samples
