"""Concept mention detection over an indexed knowledge graph.

Two matchers are provided. ``link_basic`` is naive whitespace tokenization
plus exact label lookup. ``link_enhanced`` matches token n-grams with a
rule-based lemmatizer and stop-word filtering; concept labels are lemmatized
with the same rules, so inflected mentions ("lifted weights") still reach
multi-word concepts ("lift weights"). The bundled lemmatizer and stop-word
list live in ``data/`` as plain-text files, one entry per line, keeping the
matchers deterministic and dependency-free.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Optional, Tuple

from .kgstore import ConceptId, KnowledgeGraph, normalize_label

_PUNCT = string.punctuation
_TOKEN_RE = re.compile(r"\S+")
_VOWELS = frozenset("aeiou")

QUERY_SIDE = "query_side"
ANSWER_SIDE = "answer_side"


def _data_lines(name: str) -> list:
    text = resources.files("kgalign").joinpath("data").joinpath(name).read_text("utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]


@lru_cache(maxsize=1)
def stopwords() -> frozenset:
    return frozenset(_data_lines("stopwords.txt"))


@lru_cache(maxsize=1)
def _lemma_exceptions() -> dict:
    table = {}
    for line in _data_lines("lemma_exceptions.txt"):
        form, lemma = line.split()
        table[form] = lemma
    return table


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        # y counts as a vowel when it follows a consonant
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of vowel->consonant transitions (Porter's m)."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        cons = _is_consonant(stem, i)
        if prev_vowel and cons:
            m += 1
        prev_vowel = not cons
    return m


def _ends_cvc(stem: str) -> bool:
    if len(stem) < 3:
        return False
    return (
        _is_consonant(stem, len(stem) - 3)
        and not _is_consonant(stem, len(stem) - 2)
        and _is_consonant(stem, len(stem) - 1)
        and stem[-1] not in "wxy"
    )


def _has_vowel(stem: str) -> bool:
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _repair(stem: str) -> str:
    """Undo consonant doubling / restore a silent e after -ed/-ing stripping."""
    if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-1] in "bdgmnprt":
        return stem[:-1]
    if stem[-1] in "uv":
        # no English verb stem ends in bare u or v: argue, believe, fatigue
        return stem + "e"
    if _measure(stem) == 1 and _ends_cvc(stem):
        return stem + "e"
    return stem


def lemmatize(token: str) -> str:
    """Rule-based lemma of a single normalized word.

    Exception table first, then ordered suffix rules (plural endings,
    -ied/-ed/-ing with doubling and silent-e repair). Idempotent on its own
    outputs for the bundled rule set.
    """
    if not token:
        return ""
    base = token[:-2] if len(token) > 2 and token.endswith("'s") else token
    exc = _lemma_exceptions().get(base)
    if exc is not None:
        return exc
    n = len(base)
    if n <= 3:
        return base
    if base.endswith("ies") and n >= 5:
        return base[:-3] + "y"
    if base.endswith("sses"):
        return base[:-2]
    if n >= 5 and (
        base.endswith("shes") or base.endswith("ches") or base.endswith("xes") or base.endswith("oes")
    ):
        return base[:-2]
    if base.endswith("ss") or base.endswith("us") or base.endswith("is"):
        return base
    if base.endswith("s"):
        return base[:-1]
    if base.endswith("eed"):
        return base
    if base.endswith("ied") and n >= 5:
        return base[:-3] + "y"
    if base.endswith("ed") and n >= 4:
        stem = base[:-2]
        return _repair(stem) if _has_vowel(stem) else base
    if base.endswith("ing") and n >= 5:
        stem = base[:-3]
        return _repair(stem) if _has_vowel(stem) else base
    return base


def _lemma_phrase(phrase: str) -> str:
    return " ".join(lemmatize(part) for part in phrase.split())


@dataclass(frozen=True)
class LinkedConcept:
    """One linked mention: the concept handle, the graph label it resolved
    to, and the character span of the mention in the source text."""

    concept: ConceptId
    label: str
    span: Tuple[int, int]


@dataclass(frozen=True)
class ConceptSet:
    concepts: Tuple[LinkedConcept, ...]
    side: str = QUERY_SIDE

    def ids(self) -> Tuple[ConceptId, ...]:
        return tuple(c.concept for c in self.concepts)

    def labels(self) -> Tuple[str, ...]:
        return tuple(c.label for c in self.concepts)

    def __len__(self) -> int:
        return len(self.concepts)

    def __bool__(self) -> bool:
        return bool(self.concepts)


@dataclass(frozen=True)
class AlignmentQuery:
    """Task-shaped text: the two sides to link plus the full context used for
    similarity pruning."""

    context: str
    q_text: str
    a_text: str
    task: str


def _field(sample, name: str):
    if isinstance(sample, dict):
        return sample.get(name)
    return getattr(sample, name, None)


def _require_text(value, name: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise ValueError(f"{name} must be a non-empty string")
    return value


def build_query(sample) -> AlignmentQuery:
    """Shape a stance or choice sample into an AlignmentQuery.

    Stance pairs link the belief against the argument. Choice samples link
    premise+alt1 against premise+alt2, with the full premise+alt1+alt2 string
    as the pruning context.
    """
    belief = _field(sample, "belief")
    if belief is not None or _field(sample, "argument") is not None:
        belief = _require_text(belief, "belief")
        argument = _require_text(_field(sample, "argument"), "argument")
        return AlignmentQuery(
            context=f"{belief} {argument}",
            q_text=belief,
            a_text=argument,
            task="stance",
        )
    premise = _require_text(_field(sample, "premise"), "premise")
    alt1 = _require_text(_field(sample, "alt1"), "alt1")
    alt2 = _require_text(_field(sample, "alt2"), "alt2")
    return AlignmentQuery(
        context=f"{premise} {alt1} {alt2}",
        q_text=f"{premise} {alt1}",
        a_text=f"{premise} {alt2}",
        task="choice",
    )


def _tokens(text: str) -> list:
    """Whitespace tokens as (normalized form, start, end); spans cover the
    token with surrounding punctuation stripped."""
    out = []
    for m in _TOKEN_RE.finditer(text):
        raw = m.group()
        lead = len(raw) - len(raw.lstrip(_PUNCT))
        trail = len(raw) - len(raw.rstrip(_PUNCT))
        core = raw[lead : len(raw) - trail]
        if not core:
            continue
        norm = normalize_label(core)
        if not norm:
            continue
        out.append((norm, m.start() + lead, m.end() - trail))
    return out


def link_basic(text: str, graph: KnowledgeGraph, side: str = QUERY_SIDE) -> ConceptSet:
    """Whitespace tokens matched against concept labels by exact overlap;
    ordered by first occurrence, duplicates dropped."""
    index = graph.label_index
    seen = set()
    found = []
    for norm, start, end in _tokens(text):
        cid = index.get(norm)
        if cid is None or cid in seen:
            continue
        seen.add(cid)
        found.append(LinkedConcept(cid, graph.labels[cid], (start, end)))
    return ConceptSet(tuple(found), side)


def _lemma_label_index(graph: KnowledgeGraph) -> dict:
    """label lemma-form -> smallest matching concept id; cached on the graph
    (immutable after ingest, so the cache never invalidates)."""
    index = graph._lemma_index
    if index is None:
        index = {}
        for cid, lab in enumerate(graph.labels):
            lem = _lemma_phrase(lab)
            if lem not in index:
                index[lem] = cid
        graph._lemma_index = index
    return index


def link_enhanced(
    text: str,
    graph: KnowledgeGraph,
    max_ngram: int = 4,
    side: str = QUERY_SIDE,
) -> ConceptSet:
    """N-gram matching with lemmatization and stop-word filtering.

    Every n-gram up to ``max_ngram`` is probed in surface form, then in
    lemmatized form, against the labels and against a lemmatized label index.
    N-grams made entirely of stop words are dropped. Overlapping matches are
    resolved leftmost-longest, so no two returned spans overlap and longer
    matches suppress contained shorter ones.
    """
    if max_ngram < 1:
        raise ValueError("max_ngram must be >= 1")
    toks = _tokens(text)
    if not toks:
        return ConceptSet((), side)
    stops = stopwords()
    norms = [t[0] for t in toks]
    lemmas = [_lemma_phrase(n) for n in norms]
    is_stop = [n in stops for n in norms]
    label_index = graph.label_index
    lemma_index = _lemma_label_index(graph)

    matches = []  # (token start, token stop, concept id)
    count = len(toks)
    for i in range(count):
        for n in range(1, max_ngram + 1):
            j = i + n
            if j > count:
                break
            if all(is_stop[i:j]):
                continue
            surface = " ".join(norms[i:j])
            cid = label_index.get(surface)
            if cid is None:
                lemma = " ".join(lemmas[i:j])
                cid = label_index.get(lemma)
                if cid is None:
                    cid = lemma_index.get(lemma)
            if cid is not None:
                matches.append((i, j, cid))

    matches.sort(key=lambda m: (m[0], -(m[1] - m[0])))
    kept = []
    taken = []
    for i, j, cid in matches:
        if any(i < e and s < j for s, e in taken):
            continue
        taken.append((i, j))
        kept.append((i, j, cid))

    seen = set()
    found = []
    for i, j, cid in kept:
        if cid in seen:
            continue
        seen.add(cid)
        found.append(LinkedConcept(cid, graph.labels[cid], (toks[i][1], toks[j - 1][2])))
    return ConceptSet(tuple(found), side)
