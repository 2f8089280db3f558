"""Immutable in-memory knowledge graph with a versioned binary index cache.

The graph is ingested once from a triple dump (head, relation, tail[, weight])
and is read-only afterwards, so lookups, adjacency queries and path searches
can run concurrently from any number of threads. Adjacency is kept in CSR form
(numpy arrays): a ConceptNet-sized graph (~800k nodes, ~2.5M edges) fits in a
few hundred megabytes and the hop-capped search kernels stay cache-friendly.

Direction handling: every undirected edge is stored once in canonical
orientation and indexed under both endpoints; the arc that runs against the
canonical orientation carries ``reversed=True`` on its relation. A dump row
whose relation label starts with ``_`` denotes a reversed edge and is folded
into that flag at ingest time; the underscore never survives into a relation
name.
"""

from __future__ import annotations

import re
import string
import struct
from array import array
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

ConceptId = int

_MAGIC = b"KGIX"
_FOOTER = b"KGEN"
FORMAT_VERSION = 1
_HEADER_FMT = "<4sIQQIQQ"
_HEADER_SIZE = struct.calcsize(_HEADER_FMT)

_PUNCT = string.punctuation
# Fast path: a label that is already in canonical form is returned untouched.
_NORMAL_TOKEN = r"[a-z0-9]+(?:[-'][a-z0-9]+)*"
_NORMAL_RE = re.compile(rf"{_NORMAL_TOKEN}(?: {_NORMAL_TOKEN})*\Z")

RawRow = Union[Tuple[str, str, str], Tuple[str, str, str, object], Sequence[object]]


class KgError(Exception):
    """Base error for graph storage problems."""


class KgFormatError(KgError):
    """The binary index file is corrupt, truncated or version-mismatched."""


class InvalidConceptError(KgError, IndexError):
    """A concept handle is out of range for this graph."""


@dataclass(frozen=True)
class RelationType:
    """A typed edge label; ``reversed`` marks traversal against the stored
    orientation (the dump's underscore convention, parsed away at ingest)."""

    name: str
    reversed: bool = False


@dataclass(frozen=True)
class Triple:
    head: ConceptId
    relation: RelationType
    tail: ConceptId
    weight: float = 1.0


@dataclass(frozen=True)
class TextTriple:
    """A triple rendered with label strings; shared currency between paths,
    gold annotation graphs and generated paths."""

    head: str
    relation: str
    tail: str
    reversed: bool = False


@dataclass
class IngestReport:
    rows_total: int = 0
    rows_skipped: int = 0
    duplicates_merged: int = 0


def as_text_triples(source) -> Tuple[TextTriple, ...]:
    """Coerce a Path, Subgraph, or iterable of (head, relation, tail[, rev])
    records into a TextTriple tuple. None and empty sources give ()."""
    if source is None:
        return ()
    attr = getattr(source, "text_triples", None)
    if attr is None:
        attr = getattr(source, "text_edges", None)
    if attr is not None:
        return tuple(attr)
    out = []
    for item in source:
        if isinstance(item, TextTriple):
            out.append(item)
        elif isinstance(item, dict):
            out.append(
                TextTriple(
                    str(item.get("head", "")),
                    str(item.get("relation", "")),
                    str(item.get("tail", "")),
                    bool(item.get("reversed", False)),
                )
            )
        else:
            rev = bool(item[3]) if len(item) > 3 else False
            out.append(TextTriple(str(item[0]), str(item[1]), str(item[2]), rev))
    return tuple(out)


def normalize_label(raw: str) -> str:
    """Canonicalize a concept or relation label.

    Lowercases, turns underscores into spaces, collapses whitespace and strips
    ASCII punctuation from token edges (inner hyphens and apostrophes are
    kept). Idempotent; empty input stays empty.
    """
    if _NORMAL_RE.match(raw):
        return raw
    text = raw.lower().replace("_", " ")
    parts = []
    for tok in text.split():
        tok = tok.strip(_PUNCT)
        if tok:
            parts.append(tok)
    return " ".join(parts)


class KnowledgeGraph:
    """Indexed multi-relational graph; immutable after construction."""

    __slots__ = (
        "labels",
        "label_index",
        "relations",
        "edge_head",
        "edge_rel",
        "edge_tail",
        "edge_weight",
        "indptr",
        "arc_nbr",
        "arc_rel",
        "arc_weight",
        "_lemma_index",
    )

    def __init__(
        self,
        labels: list,
        relations: list,
        edge_head: np.ndarray,
        edge_rel: np.ndarray,
        edge_tail: np.ndarray,
        edge_weight: np.ndarray,
    ):
        self.labels = labels
        self.label_index = {lab: i for i, lab in enumerate(labels)}
        self.relations = relations
        self.edge_head = edge_head
        self.edge_rel = edge_rel
        self.edge_tail = edge_tail
        self.edge_weight = edge_weight
        self._lemma_index = None  # filled lazily by the linker
        self._build_csr()

    @property
    def node_count(self) -> int:
        return len(self.labels)

    @property
    def edge_count(self) -> int:
        return len(self.edge_head)

    def _build_csr(self) -> None:
        n = self.node_count
        src = np.concatenate([self.edge_head, self.edge_tail]).astype(np.int64)
        dst = np.concatenate([self.edge_tail, self.edge_head]).astype(np.int32)
        # Arc code packs (relation rank, reversed bit); relation ids are ranks
        # in name order, so sorting by code sorts by relation name.
        code = np.concatenate([self.edge_rel * 2, self.edge_rel * 2 + 1]).astype(np.int32)
        weight = np.concatenate([self.edge_weight, self.edge_weight]).astype(np.float32)
        order = np.lexsort((code, dst, src))
        self.arc_nbr = np.ascontiguousarray(dst[order])
        self.arc_rel = np.ascontiguousarray(code[order])
        self.arc_weight = np.ascontiguousarray(weight[order])
        counts = np.bincount(src, minlength=n)
        indptr = np.zeros(n + 1, np.int64)
        np.cumsum(counts, out=indptr[1:])
        self.indptr = indptr

    def _check(self, cid: ConceptId) -> None:
        if not 0 <= cid < self.node_count:
            raise InvalidConceptError(f"concept id {cid} out of range [0, {self.node_count})")

    def label(self, cid: ConceptId) -> str:
        self._check(cid)
        return self.labels[cid]

    def lookup(self, phrase: str) -> Optional[ConceptId]:
        return self.label_index.get(normalize_label(phrase))

    def relation_type(self, code: int) -> RelationType:
        return RelationType(self.relations[code >> 1], bool(code & 1))

    def neighbors(self, cid: ConceptId) -> list:
        """Adjacency of ``cid`` as (neighbor, relation, weight), sorted by
        (neighbor id, relation name, reversed flag)."""
        self._check(cid)
        start, end = int(self.indptr[cid]), int(self.indptr[cid + 1])
        out = []
        for a in range(start, end):
            out.append(
                (
                    int(self.arc_nbr[a]),
                    self.relation_type(int(self.arc_rel[a])),
                    float(self.arc_weight[a]),
                )
            )
        return out

    def degree(self, cid: ConceptId) -> int:
        self._check(cid)
        return int(self.indptr[cid + 1] - self.indptr[cid])


def empty_graph() -> KnowledgeGraph:
    zi = np.zeros(0, np.int32)
    return KnowledgeGraph([], [], zi, zi.copy(), zi.copy(), np.zeros(0, np.float32))


def ingest(rows: Iterable[RawRow], *, default_weight: float = 1.0):
    """Build a graph from raw rows; returns ``(graph, IngestReport)``.

    Malformed rows (wrong arity, unparsable/negative weight, labels that
    normalize to nothing) are skipped and counted. Duplicate edges are merged
    keeping the maximum weight; ``_``-prefixed relations are folded into the
    reversed orientation before deduplication, so a reversed row and its
    forward twin collapse to one edge.
    """
    labels: list = []
    label_ids: dict = {}
    rel_names: list = []
    rel_ids: dict = {}
    heads = array("i")
    rels = array("i")
    tails = array("i")
    weights = array("d")
    total = skipped = 0

    for row in rows:
        total += 1
        if not isinstance(row, (tuple, list)) or not 3 <= len(row) <= 4:
            skipped += 1
            continue
        if len(row) == 4:
            try:
                w = float(row[3])
            except (TypeError, ValueError):
                skipped += 1
                continue
        else:
            w = default_weight
        if not np.isfinite(w) or w < 0:
            skipped += 1
            continue
        rel_raw = str(row[1]).strip()
        reversed_row = rel_raw.startswith("_")
        rel_name = normalize_label(rel_raw[1:] if reversed_row else rel_raw)
        head = normalize_label(str(row[0]))
        tail = normalize_label(str(row[2]))
        if not head or not tail or not rel_name:
            skipped += 1
            continue
        if reversed_row:
            head, tail = tail, head
        hid = label_ids.get(head)
        if hid is None:
            hid = len(labels)
            label_ids[head] = hid
            labels.append(head)
        tid = label_ids.get(tail)
        if tid is None:
            tid = len(labels)
            label_ids[tail] = tid
            labels.append(tail)
        rid = rel_ids.get(rel_name)
        if rid is None:
            rid = len(rel_names)
            rel_ids[rel_name] = rid
            rel_names.append(rel_name)
        heads.append(hid)
        rels.append(rid)
        tails.append(tid)
        weights.append(w)

    report = IngestReport(rows_total=total, rows_skipped=skipped)
    if not heads:
        return empty_graph(), report

    h_arr = np.frombuffer(heads, dtype=np.intc).astype(np.int64)
    t_arr = np.frombuffer(tails, dtype=np.intc).astype(np.int64)
    r_prov = np.frombuffer(rels, dtype=np.intc)
    w_arr = np.frombuffer(weights, dtype=np.float64)

    # Relation ids become ranks in sorted-name order so that adjacency order
    # (and therefore search expansion order) follows relation names.
    sorted_names = sorted(rel_names)
    name_rank = {nm: i for i, nm in enumerate(sorted_names)}
    remap = np.empty(len(rel_names), np.int64)
    for prov, nm in enumerate(rel_names):
        remap[prov] = name_rank[nm]
    r_arr = remap[r_prov]

    order = np.lexsort((w_arr, t_arr, r_arr, h_arr))
    hs, rs, ts, ws = h_arr[order], r_arr[order], t_arr[order], w_arr[order]
    keep = np.empty(len(hs), bool)
    keep[-1] = True
    keep[:-1] = (hs[1:] != hs[:-1]) | (rs[1:] != rs[:-1]) | (ts[1:] != ts[:-1])
    report.duplicates_merged = int(len(hs) - keep.sum())

    graph = KnowledgeGraph(
        labels,
        sorted_names,
        hs[keep].astype(np.int32),
        rs[keep].astype(np.int32),
        ts[keep].astype(np.int32),
        ws[keep].astype(np.float32),
    )
    return graph, report


def read_dump(path, delimiter: str = "\t", encoding: str = "utf-8") -> Iterator[tuple]:
    """Yield raw rows from a delimiter-separated dump file; blank lines are
    ignored, malformed rows are left for ingest() to count."""
    with open(path, "r", encoding=encoding, newline="") as fh:
        for line in fh:
            line = line.rstrip("\r\n")
            if not line:
                continue
            yield tuple(line.split(delimiter))


def lookup_exact(graph: KnowledgeGraph, phrase: str) -> Optional[ConceptId]:
    return graph.lookup(phrase)


def neighbors(graph: KnowledgeGraph, cid: ConceptId) -> list:
    return graph.neighbors(cid)


def save_index(graph: KnowledgeGraph, path) -> None:
    """Write the versioned binary index (layout documented in docs/FORMATS.md)."""
    labels_blob = "\n".join(graph.labels).encode("utf-8")
    rel_blob = "\n".join(graph.relations).encode("utf-8")
    header = struct.pack(
        _HEADER_FMT,
        _MAGIC,
        FORMAT_VERSION,
        graph.node_count,
        graph.edge_count,
        len(graph.relations),
        len(labels_blob),
        len(rel_blob),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(labels_blob)
        fh.write(rel_blob)
        graph.edge_head.astype("<i4").tofile(fh)
        graph.edge_rel.astype("<i4").tofile(fh)
        graph.edge_tail.astype("<i4").tofile(fh)
        graph.edge_weight.astype("<f4").tofile(fh)
        fh.write(_FOOTER)


def _read_exact(fh, count: int, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise KgFormatError(f"truncated index file while reading {what}")
    return data


def _read_array(fh, dtype, count: int, what: str) -> np.ndarray:
    arr = np.fromfile(fh, dtype, count)
    if len(arr) != count:
        raise KgFormatError(f"truncated index file while reading {what}")
    return arr


def load_index(path) -> KnowledgeGraph:
    """Load a graph saved by save_index(); never returns a partial graph."""
    with open(path, "rb") as fh:
        header = _read_exact(fh, _HEADER_SIZE, "header")
        magic, version, n, e, r, labels_len, rel_len = struct.unpack(_HEADER_FMT, header)
        if magic != _MAGIC:
            raise KgFormatError("not a kgalign index file (bad magic bytes)")
        if version != FORMAT_VERSION:
            raise KgFormatError(
                f"index format version {version} unsupported (expected {FORMAT_VERSION})"
            )
        labels_blob = _read_exact(fh, labels_len, "node table")
        labels = labels_blob.decode("utf-8").split("\n") if labels_len else []
        if len(labels) != n:
            raise KgFormatError(f"node table holds {len(labels)} labels, header says {n}")
        rel_blob = _read_exact(fh, rel_len, "relation table")
        relations = rel_blob.decode("utf-8").split("\n") if rel_len else []
        if len(relations) != r:
            raise KgFormatError(f"relation table holds {len(relations)} names, header says {r}")
        edge_head = _read_array(fh, "<i4", e, "edge heads")
        edge_rel = _read_array(fh, "<i4", e, "edge relations")
        edge_tail = _read_array(fh, "<i4", e, "edge tails")
        edge_weight = _read_array(fh, "<f4", e, "edge weights")
        footer = fh.read(len(_FOOTER))
        if footer != _FOOTER:
            raise KgFormatError("truncated index file (footer missing)")
        if fh.read(1):
            raise KgFormatError("trailing bytes after index footer")
    if e:
        if int(edge_head.max()) >= n or int(edge_tail.max()) >= n:
            raise KgFormatError("edge table references out-of-range node ids")
        if edge_head.min() < 0 or edge_tail.min() < 0:
            raise KgFormatError("edge table references negative node ids")
        if int(edge_rel.max()) >= r or int(edge_rel.min()) < 0:
            raise KgFormatError("edge table references out-of-range relation ids")
    return KnowledgeGraph(
        labels,
        relations,
        edge_head.astype(np.int32),
        edge_rel.astype(np.int32),
        edge_tail.astype(np.int32),
        edge_weight.astype(np.float32),
    )


def graphs_equal(a: KnowledgeGraph, b: KnowledgeGraph) -> bool:
    """Logical equality: same labels, relations, edges, weights and flags."""
    return (
        a.labels == b.labels
        and a.relations == b.relations
        and np.array_equal(a.edge_head, b.edge_head)
        and np.array_equal(a.edge_rel, b.edge_rel)
        and np.array_equal(a.edge_tail, b.edge_tail)
        and np.array_equal(a.edge_weight, b.edge_weight)
    )
