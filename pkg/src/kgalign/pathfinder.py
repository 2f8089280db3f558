"""Hop-capped path retrieval between two concept sets.

Search runs on the graph's CSR arrays through a compiled Cython kernel when
available, with a pure-Python fallback selected at import time (force it with
``KGALIGN_PURE_PYTHON=1``). Both kernels implement the same level-synchronized
bidirectional BFS with identical expansion order, so paths do not depend on
which kernel is active; ``benchmarks/bench_kernels.py`` compares their speed.

Edge weights are stored but searches treat every hop as unit cost, so the
minimum-cost path is the minimum-hop path.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from itertools import product
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from .kgstore import (
    ConceptId,
    KnowledgeGraph,
    RelationType,
    TextTriple,
    Triple,
)

if os.environ.get("KGALIGN_PURE_PYTHON"):
    from . import _bfs_py as _kernel
else:
    try:
        from . import _bfs as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _bfs_py as _kernel

KERNEL_NAME: str = _kernel.KERNEL_NAME


def available_kernels() -> dict:
    """All importable kernel modules keyed by name (for parity tests and the
    benchmark)."""
    from . import _bfs_py

    kernels = {_bfs_py.KERNEL_NAME: _bfs_py}
    try:
        from . import _bfs  # type: ignore[attr-defined]

        kernels[_bfs.KERNEL_NAME] = _bfs
    except ImportError:
        pass
    return kernels


@dataclass(frozen=True)
class PathQueryConfig:
    k: int = 3
    max_pairs: int = 64
    per_pair_paths: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_pairs < 1:
            raise ValueError("max_pairs must be >= 1")
        if self.per_pair_paths < 1:
            raise ValueError("per_pair_paths must be >= 1")


@dataclass(frozen=True)
class Path:
    """A hop-bounded path; triples are oriented along the traversal, with the
    relation's reversed flag marking arcs that run against the stored edge
    orientation. ``text_triples`` carry the resolved labels so downstream
    consumers never need the graph."""

    triples: Tuple[Triple, ...]
    text_triples: Tuple[TextTriple, ...]
    endpoints: Tuple[ConceptId, ConceptId]

    @property
    def hop_count(self) -> int:
        return len(self.triples)


@dataclass(frozen=True)
class Subgraph:
    """Union of paths: insertion-ordered unique nodes and edges plus the
    contributing paths as provenance."""

    nodes: Tuple[ConceptId, ...]
    edges: Tuple[Triple, ...]
    text_edges: Tuple[TextTriple, ...]
    provenance: Tuple[Path, ...] = ()


def _path_from_arcs(graph: KnowledgeGraph, src: ConceptId, arcs: Sequence[int]) -> Path:
    triples = []
    texts = []
    node = src
    for a in arcs:
        nbr = int(graph.arc_nbr[a])
        code = int(graph.arc_rel[a])
        rel = graph.relation_type(code)
        weight = float(graph.arc_weight[a])
        triples.append(Triple(node, rel, nbr, weight))
        texts.append(TextTriple(graph.labels[node], rel.name, graph.labels[nbr], rel.reversed))
        node = nbr
    return Path(tuple(triples), tuple(texts), (src, node))


def shortest_path(
    graph: KnowledgeGraph, src: ConceptId, dst: ConceptId, k: int
) -> Optional[Path]:
    """One minimum-hop path between two concepts, or None beyond ``k`` hops.

    Ties between equal-length paths break deterministically on the kernels'
    expansion order, which follows the adjacency ordering (neighbor id, then
    relation name). ``src == dst`` yields the zero-hop path.
    """
    graph._check(src)
    graph._check(dst)
    if k < 0:
        raise ValueError("k must be >= 0")
    arcs = _kernel.shortest_path_arcs(graph.indptr, graph.arc_nbr, graph.arc_rel, src, dst, k)
    if arcs is None:
        return None
    return _path_from_arcs(graph, src, arcs)


def _min_hop_paths(
    graph: KnowledgeGraph, src: ConceptId, dst: ConceptId, k: int, limit: int
) -> List[Path]:
    """Up to ``limit`` distinct minimum-hop paths in lexicographic arc order."""
    first = _kernel.shortest_path_arcs(graph.indptr, graph.arc_nbr, graph.arc_rel, src, dst, k)
    if first is None:
        return []
    hops = len(first)
    if hops == 0:
        return [Path((), (), (src, dst))]
    if limit == 1:
        return [_path_from_arcs(graph, src, first)]

    indptr, nbr = graph.indptr, graph.arc_nbr
    # exact backward hop distances up to the shortest length
    dist_b = {dst: 0}
    frontier = [dst]
    for level in range(1, hops):
        nxt = []
        for u in frontier:
            for a in range(int(indptr[u]), int(indptr[u + 1])):
                v = int(nbr[a])
                if v not in dist_b:
                    dist_b[v] = level
                    nxt.append(v)
        frontier = nxt
        if not frontier:
            break

    results: List[List[int]] = []

    def descend(node: int, depth: int, acc: List[int]) -> None:
        if len(results) >= limit:
            return
        if depth == hops:
            results.append(list(acc))
            return
        want = hops - depth - 1
        for a in range(int(indptr[node]), int(indptr[node + 1])):
            v = int(nbr[a])
            if (v == dst and want == 0) or dist_b.get(v, -1) == want:
                acc.append(a)
                descend(v, depth + 1, acc)
                acc.pop()
                if len(results) >= limit:
                    return

    descend(src, 0, [])
    return [_path_from_arcs(graph, src, arcs) for arcs in results]


def _concept_ids(concepts) -> List[ConceptId]:
    if hasattr(concepts, "concepts"):
        return [c.concept for c in concepts.concepts]
    return list(concepts)


def find_paths(graph: KnowledgeGraph, cq, ca, cfg: PathQueryConfig = PathQueryConfig()) -> List[Path]:
    """Per-pair shortest paths between the two concept sets.

    Pairs are explored in text-position order (query concept first, answer
    concept second) up to ``max_pairs``; a pair sharing one concept yields the
    zero-hop path. Empty input sets yield an empty result, which downstream
    auditing records as an alignment failure.
    """
    q_ids = _concept_ids(cq)
    a_ids = _concept_ids(ca)
    paths: List[Path] = []
    for explored, (q, a) in enumerate(product(q_ids, a_ids)):
        if explored >= cfg.max_pairs:
            break
        if q == a:
            paths.append(Path((), (), (q, q)))
            continue
        if cfg.per_pair_paths == 1:
            found = shortest_path(graph, q, a, cfg.k)
            if found is not None:
                paths.append(found)
        else:
            paths.extend(_min_hop_paths(graph, q, a, cfg.k, cfg.per_pair_paths))
    return paths


def subgraph_from_paths(paths: Iterable[Path]) -> Subgraph:
    """Deduplicated union of path edges and nodes; provenance retained."""
    paths = tuple(paths)
    nodes: dict = {}
    edges: dict = {}
    for path in paths:
        if not path.triples:
            nodes.setdefault(path.endpoints[0], None)
            continue
        for triple, text in zip(path.triples, path.text_triples):
            nodes.setdefault(triple.head, None)
            nodes.setdefault(triple.tail, None)
            edges.setdefault(triple, text)
    return Subgraph(
        nodes=tuple(nodes),
        edges=tuple(edges),
        text_edges=tuple(edges.values()),
        provenance=paths,
    )


def to_undirected(sub: Union[Subgraph, Path]) -> Union[Subgraph, Path]:
    """Clear every reversed flag; relation names are untouched (the dump's
    underscore convention was already stripped at ingest). Idempotent."""
    if isinstance(sub, Path):
        return Path(
            tuple(replace(t, relation=replace(t.relation, reversed=False)) for t in sub.triples),
            tuple(replace(t, reversed=False) for t in sub.text_triples),
            sub.endpoints,
        )
    edges: dict = {}
    for triple, text in zip(sub.edges, sub.text_edges):
        flat = replace(triple, relation=replace(triple.relation, reversed=False))
        edges.setdefault(flat, replace(text, reversed=False))
    return Subgraph(
        nodes=sub.nodes,
        edges=tuple(edges),
        text_edges=tuple(edges.values()),
        provenance=sub.provenance,
    )
