"""Shared test utilities: independent oracles, random graph builders and an
in-process HTTP server for wire-protocol tests.

Oracles here deliberately reimplement behavior from scratch (plain dicts,
recursion, math.fsum) so they stay independent of the code paths they check.
"""

from __future__ import annotations

import hashlib
import math
import random
import threading
import time

import uvicorn


# ---------------------------------------------------------------------------
# pathfinding oracle: exhaustive enumeration of simple paths


def oracle_min_hops(adjacency, src, dst, k):
    """Minimum hop count over all simple paths src->dst of length <= k, by
    exhaustive DFS; None if no such path exists. adjacency: node -> set."""
    if src == dst:
        return 0
    best = None

    def walk(node, depth, visited):
        nonlocal best
        if depth >= k or (best is not None and depth + 1 >= best):
            return
        for nxt in sorted(adjacency.get(node, ())):
            if nxt == dst:
                if best is None or depth + 1 < best:
                    best = depth + 1
            elif nxt not in visited:
                visited.add(nxt)
                walk(nxt, depth + 1, visited)
                visited.remove(nxt)

    walk(src, 0, {src})
    return best


def adjacency_from_rows(rows):
    """Undirected label adjacency from raw dump rows."""
    adj = {}
    for row in rows:
        h, t = row[0], row[2]
        adj.setdefault(h, set()).add(t)
        adj.setdefault(t, set()).add(h)
    return adj


def random_graph_rows(rng: random.Random, max_nodes=12, max_edges=30):
    """Random multi-relational rows over a small node universe."""
    n_nodes = rng.randint(2, max_nodes)
    n_edges = rng.randint(1, max_edges)
    relations = ["related to", "is a", "part of"]
    rows = []
    for _ in range(n_edges):
        h = f"n{rng.randrange(n_nodes)}"
        t = f"n{rng.randrange(n_nodes)}"
        if h == t:
            continue
        rows.append((h, rng.choice(relations), t))
    if not rows:
        rows.append(("n0", "related to", "n1"))
    return rows


# ---------------------------------------------------------------------------
# embedding oracle: dict-based hashed character n-grams


def _oracle_bucket(gram, dim):
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % dim


def oracle_embed(text, dim=1024):
    """Independent recomputation of the builtin embedding as a sparse dict."""
    counts = {}
    prepared = " ".join(text.lower().split())
    if 0 < len(prepared) < 3:
        return {_oracle_bucket(prepared, dim): 1.0}
    for n in (3, 4, 5):
        for i in range(len(prepared) - n + 1):
            bucket = _oracle_bucket(prepared[i : i + n], dim)
            counts[bucket] = counts.get(bucket, 0) + 1
    norm = math.sqrt(math.fsum(v * v for v in counts.values()))
    if norm == 0:
        return {}
    return {k: v / norm for k, v in counts.items()}


def oracle_cosine(a, b):
    if not a or not b:
        return 0.0
    na = math.sqrt(math.fsum(v * v for v in a.values()))
    nb = math.sqrt(math.fsum(v * v for v in b.values()))
    dot = math.fsum(a[k] * b[k] for k in a.keys() & b.keys())
    return dot / (na * nb)


def oracle_similarity(text_a, text_b, dim=1024):
    return oracle_cosine(oracle_embed(text_a, dim), oracle_embed(text_b, dim))


# ---------------------------------------------------------------------------
# synthetic ConceptNet-scale graph


def powerlaw_rows(n_nodes, n_edges, seed, relations=("related to", "is a", "used for", "part of")):
    """Unique power-law-ish edges at ConceptNet scale, vectorized."""
    import numpy as np

    rng = np.random.default_rng(seed)
    weights = 1.0 / np.arange(1, n_nodes + 1, dtype=np.float64)
    prob = weights / weights.sum()
    heads = np.empty(0, np.int64)
    tails = np.empty(0, np.int64)
    rels = np.empty(0, np.int64)
    while len(heads) < n_edges:
        need = int((n_edges - len(heads)) * 1.25) + 1024
        h = rng.choice(n_nodes, size=need, p=prob)
        t = rng.choice(n_nodes, size=need, p=prob)
        r = rng.integers(0, len(relations), size=need)
        mask = h != t
        heads = np.concatenate([heads, h[mask]])
        tails = np.concatenate([tails, t[mask]])
        rels = np.concatenate([rels, r[mask]])
        stacked = np.stack([heads, rels, tails], axis=1)
        uniq = np.unique(stacked, axis=0)
        heads, rels, tails = uniq[:, 0], uniq[:, 1], uniq[:, 2]
    return heads[:n_edges], rels[:n_edges], tails[:n_edges], list(relations)


def write_powerlaw_dump(path, n_nodes, n_edges, seed):
    heads, rels, tails, names = powerlaw_rows(n_nodes, n_edges, seed)
    with open(path, "w", encoding="utf-8") as fh:
        for h, r, t in zip(heads, rels, tails):
            fh.write(f"c{h}\t{names[r]}\tc{t}\n")


# ---------------------------------------------------------------------------
# in-process HTTP server


class ServerThread:
    """Run an ASGI app on an ephemeral port in a daemon thread."""

    def __init__(self, app, host="127.0.0.1"):
        self._config = uvicorn.Config(app, host=host, port=0, log_level="error")
        self._server = uvicorn.Server(self._config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)
        self.host = host
        self.port = None

    def __enter__(self):
        self._thread.start()
        deadline = time.time() + 15
        while not self._server.started:
            if time.time() > deadline:
                raise RuntimeError("test server failed to start")
            time.sleep(0.01)
        self.port = self._server.servers[0].sockets[0].getsockname()[1]
        return self

    @property
    def base_url(self):
        return f"http://{self.host}:{self.port}"

    def __exit__(self, *exc):
        self._server.should_exit = True
        self._thread.join(timeout=10)
        return False
