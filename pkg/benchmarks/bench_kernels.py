#!/usr/bin/env python3
"""Benchmark the compiled search kernel against the pure-Python fallback.

Builds a synthetic power-law graph, runs the same hop-capped queries through
every importable kernel and prints latency percentiles. Example:

    python benchmarks/bench_kernels.py --edges 500000 --queries 500
"""

from __future__ import annotations

import argparse
import random
import statistics
import time

import numpy as np

from kgalign.kgstore import ingest
from kgalign.pathfinder import available_kernels


def synthetic_rows(n_nodes: int, n_edges: int, seed: int):
    rng = np.random.default_rng(seed)
    weights = 1.0 / np.arange(1, n_nodes + 1, dtype=np.float64)
    prob = weights / weights.sum()
    relations = ["related to", "is a", "used for", "part of"]
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
        uniq = np.unique(np.stack([heads, rels, tails], axis=1), axis=0)
        heads, rels, tails = uniq[:, 0], uniq[:, 1], uniq[:, 2]
    for h, r, t in zip(heads[:n_edges], rels[:n_edges], tails[:n_edges]):
        yield (f"c{h}", relations[r], f"c{t}")


def run(kernel, graph, pairs, k):
    latencies = []
    found = 0
    for src, dst in pairs:
        started = time.perf_counter()
        arcs = kernel.shortest_path_arcs(
            graph.indptr, graph.arc_nbr, graph.arc_rel, src, dst, k
        )
        latencies.append(time.perf_counter() - started)
        found += arcs is not None
    return latencies, found


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, default=200_000)
    parser.add_argument("--edges", type=int, default=500_000)
    parser.add_argument("--queries", type=int, default=500)
    parser.add_argument("--k", type=int, default=3)
    parser.add_argument("--seed", type=int, default=17)
    args = parser.parse_args()

    print(f"building synthetic graph: {args.nodes} nodes, {args.edges} edges ...")
    started = time.perf_counter()
    graph, _ = ingest(synthetic_rows(args.nodes, args.edges, args.seed))
    print(f"ingested in {time.perf_counter() - started:.1f}s "
          f"({graph.node_count} nodes, {graph.edge_count} edges)")

    rng = random.Random(args.seed)
    pairs = [
        (rng.randrange(graph.node_count), rng.randrange(graph.node_count))
        for _ in range(args.queries)
    ]

    kernels = available_kernels()
    print(f"\nkernels: {', '.join(kernels)}  (k={args.k}, {args.queries} queries)\n")
    print(f"{'kernel':<10} {'p50 ms':>10} {'p90 ms':>10} {'mean ms':>10} {'found':>7}")
    baseline = None
    for name in sorted(kernels):
        latencies, found = run(kernels[name], graph, pairs, args.k)
        p50 = statistics.median(latencies) * 1e3
        p90 = statistics.quantiles(latencies, n=10)[8] * 1e3
        mean = statistics.fmean(latencies) * 1e3
        print(f"{name:<10} {p50:>10.3f} {p90:>10.3f} {mean:>10.3f} {found:>7}")
        if name == "cython":
            baseline = mean
        elif baseline is not None:
            print(f"\nspeedup (mean, cython vs {name}): {mean / baseline:.1f}x")

    # both kernels must agree on every query
    if len(kernels) == 2:
        names = sorted(kernels)
        disagreements = 0
        for src, dst in pairs:
            results = [
                kernels[n].shortest_path_arcs(
                    graph.indptr, graph.arc_nbr, graph.arc_rel, src, dst, args.k
                )
                for n in names
            ]
            disagreements += results[0] != results[1]
        print(f"kernel agreement: {args.queries - disagreements}/{args.queries} identical paths")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
