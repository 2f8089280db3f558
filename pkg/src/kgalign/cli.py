"""Batch CLI: ingest a triple dump, align datasets, aggregate quality stats,
or serve the read-only HTTP API.

Every pipeline knob is a flag; flags override the optional key=value config
file (--config), which overrides built-in defaults. Records are JSON-lines,
one per sample, ordered by sample id regardless of worker count.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import OrderedDict
from pathlib import Path
from typing import Optional

from . import __version__
from .corpus import load_choice_dataset, load_stance_dataset
from .generator import RemoteGenerator, StubGenerator
from .kgstore import KgError, ingest, load_index, read_dump, save_index
from .pipeline import (
    APPROACHES,
    TASKS,
    PipelineConfig,
    align_dataset,
    record_to_json,
)
from .pruner import FallbackEmbedder, HashedNgramEmbedder, RemoteEmbedder
from .quality import render_table, report, report_records


class CliError(Exception):
    """Fatal CLI failure; message goes to stderr, exit code is nonzero."""


def load_config_file(path) -> dict:
    """Parse a simple key = value config file; '#' starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip().strip('"').strip("'")
    return values


_CONFIG_OPTIONS = {
    # name -> (type, default)
    "k": (int, 3),
    "max_pairs": (int, 64),
    "per_pair_paths": (int, 1),
    "top_n": (int, 1),
    "max_ngram": (int, 4),
    "sep_token": (str, "[SEP]"),
    "provider": (str, "builtin"),
    "provider_fallback": (lambda v: str(v).lower() in ("1", "true", "yes"), False),
    "generator": (str, "stub"),
    "workers": (int, 1),
}


def _effective(args, name: str, file_values: dict):
    """Flag > config file > default."""
    cli_value = getattr(args, name, None)
    if cli_value is not None:
        return cli_value
    caster, default = _CONFIG_OPTIONS[name]
    if name in file_values:
        return caster(file_values[name])
    return default


def make_provider(spec: str, fallback: bool = False):
    """'builtin' or a remote /embed base URL; with fallback=True a remote
    provider degrades to the builtin embedder on provider errors."""
    if spec == "builtin":
        return HashedNgramEmbedder()
    provider = RemoteEmbedder(spec)
    if fallback:
        return FallbackEmbedder(provider, HashedNgramEmbedder())
    return provider


def make_generator(spec: Optional[str]):
    """'stub', 'none', or a remote /generate base URL."""
    if spec is None or spec == "none":
        return None
    if spec == "stub":
        return StubGenerator()
    return RemoteGenerator(spec)


def cmd_ingest(args) -> int:
    try:
        rows = read_dump(args.dump, delimiter=args.delimiter)
        graph, rep = ingest(rows)
    except OSError as exc:
        raise CliError(f"cannot read dump: {exc}") from exc
    save_index(graph, args.index)
    print(
        f"ingested {args.dump}: {graph.node_count} nodes, {graph.edge_count} edges "
        f"({rep.rows_total} rows, {rep.rows_skipped} skipped, "
        f"{rep.duplicates_merged} duplicates merged) -> {args.index}"
    )
    return 0


def _load_graph(path):
    try:
        return load_index(path)
    except (OSError, KgError) as exc:
        raise CliError(f"cannot load index {path}: {exc}") from exc


def _build_pipeline(args):
    file_values = load_config_file(args.config) if args.config else {}
    cfg = PipelineConfig(
        task=args.task,
        approach=args.approach,
        k=_effective(args, "k", file_values),
        max_pairs=_effective(args, "max_pairs", file_values),
        per_pair_paths=_effective(args, "per_pair_paths", file_values),
        top_n=_effective(args, "top_n", file_values),
        max_ngram=_effective(args, "max_ngram", file_values),
        sep_token=_effective(args, "sep_token", file_values),
    )
    provider = make_provider(
        _effective(args, "provider", file_values),
        _effective(args, "provider_fallback", file_values),
    )
    generator = make_generator(_effective(args, "generator", file_values))
    if cfg.approach.startswith("generated") and generator is None:
        raise CliError(
            f"approach {cfg.approach!r} needs a generator: pass --generator stub or a service URL"
        )
    workers = _effective(args, "workers", file_values)
    return cfg, provider, generator, workers


def cmd_align(args) -> int:
    cfg, provider, generator, workers = _build_pipeline(args)
    graph = _load_graph(args.index)
    try:
        if cfg.task == "stance":
            samples = load_stance_dataset(args.dataset)
        else:
            samples = load_choice_dataset(args.dataset)
    except OSError as exc:
        raise CliError(f"cannot read dataset: {exc}") from exc
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    count = failures = 0
    try:
        for record in align_dataset(graph, samples, cfg, provider, generator, workers=workers):
            out.write(record_to_json(record) + "\n")
            count += 1
            if "error" in record:
                failures += 1
    finally:
        if args.out:
            out.close()
    print(
        f"aligned {count} samples with approach {cfg.approach!r} "
        f"({failures} failures) -> {args.out or 'stdout'}",
        file=sys.stderr,
    )
    return 0


def cmd_stats(args) -> int:
    grouped: "OrderedDict[str, list]" = OrderedDict()
    try:
        with open(args.records, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                if "error" in record:
                    continue
                grouped.setdefault(record.get("approach", "unknown"), []).append(record)
    except OSError as exc:
        raise CliError(f"cannot read records: {exc}") from exc
    if not grouped:
        raise CliError(f"no usable records in {args.records}")
    provider = make_provider(args.provider or "builtin")
    reports = [report(records, approach, provider) for approach, records in grouped.items()]
    table = render_table(reports)
    if args.out_table:
        Path(args.out_table).write_text(table, encoding="utf-8")
    else:
        sys.stdout.write(table)
    if args.out_records:
        Path(args.out_records).write_text(report_records(reports), encoding="utf-8")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    cfg, provider, generator, _ = _build_pipeline(args)
    graph = _load_graph(args.index)
    app = create_app(graph, provider, generator, defaults=cfg)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _add_pipeline_flags(p: argparse.ArgumentParser, with_task: bool = True) -> None:
    if with_task:
        p.add_argument("--task", choices=TASKS, default="stance")
        p.add_argument("--approach", choices=APPROACHES, default="enhanced")
    p.add_argument("--config", help="key = value config file; flags take precedence")
    p.add_argument("--k", type=int, help="maximum path hops (default 3)")
    p.add_argument("--max-pairs", dest="max_pairs", type=int, help="concept pair cap (default 64)")
    p.add_argument(
        "--per-pair-paths", dest="per_pair_paths", type=int, help="paths kept per pair (default 1)"
    )
    p.add_argument("--top-n", dest="top_n", type=int, help="candidates kept by the pruner (default 1)")
    p.add_argument("--max-ngram", dest="max_ngram", type=int, help="longest n-gram to match (default 4)")
    p.add_argument("--sep-token", dest="sep_token", help="separator token (default [SEP])")
    p.add_argument("--provider", help="'builtin' or base URL of an /embed service")
    p.add_argument(
        "--provider-fallback",
        dest="provider_fallback",
        action="store_const",
        const=True,
        help="fall back to the builtin embedder when the remote provider fails",
    )
    p.add_argument("--generator", help="'stub', 'none', or base URL of a /generate service")
    p.add_argument("--workers", type=int, help="worker threads for batch alignment (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgalign",
        description="Align natural-language queries with subgraphs of a commonsense knowledge graph.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest a triple dump into a binary index")
    p.add_argument("--dump", required=True, help="delimiter-separated triple dump")
    p.add_argument("--index", required=True, help="output index path")
    p.add_argument("--delimiter", default="\t")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("align", help="align a dataset and write JSON-lines records")
    p.add_argument("--index", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", help="output records path (default stdout)")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("stats", help="aggregate alignment records into quality reports")
    p.add_argument("--records", required=True, help="JSON-lines records from 'align'")
    p.add_argument("--out-table", dest="out_table", help="write the TSV table here instead of stdout")
    p.add_argument("--out-records", dest="out_records", help="also write JSON-lines reports here")
    p.add_argument("--provider", help="'builtin' or base URL of an /embed service")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("serve", help="serve the read-only alignment API")
    p.add_argument("--index", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
