"""``gstned`` command line: index, link, eval, sweep, plus synth and compare.

Configuration comes from an optional JSON key-value file; flags override
file values, which override dataclass defaults.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, fields
from pathlib import Path

from .candidates import load_documents
from .embeddings import cache_key, embed_graph, load_embeddings, read_cache_key, save_embeddings
from .errors import ConfigError, EvaluationError, GstNedError, IndexMissing
from .evaluation import (
    compare_schemes,
    evaluate,
    gold_map,
    scheme_table,
    sweep,
    sweep_tsv,
)
from .kg import load_kg, write_kg
from .pipeline import (
    Linker,
    PipelineConfig,
    link_corpus,
    read_rankings,
    read_solutions,
    write_rankings,
    write_solutions,
)
from .ranker import Scheme
from .solver import write_trace
from .synthetic import SyntheticParams, write_synthetic

log = logging.getLogger("gstned")

INDEX_FILES = ("nodes.tsv", "edges.tsv", "embeddings.tsv", "index.json")
DEFAULT_THRESHOLDS = (0.70, 0.75, 0.80, 0.85, 0.90)
DEFAULT_KS = (1, 5, 10, 20, 50)


def _floats(s: str) -> list[float]:
    return [float(x) for x in s.split(",") if x]


def _ints(s: str) -> list[int]:
    return [int(x) for x in s.split(",") if x]


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of config keys")
    for f in fields(PipelineConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.type in ("bool", bool):
            p.add_argument(flag, dest=f.name, action=argparse.BooleanOptionalAction, default=None)
        elif f.name in ("fuzzy_threshold", "return_p", "inout_q", "learning_rate"):
            p.add_argument(flag, dest=f.name, type=float, default=None)
        elif f.name in ("nodes", "edges", "documents", "index_dir", "output_dir", "scheme"):
            p.add_argument(flag, dest=f.name, default=None)
        else:
            p.add_argument(flag, dest=f.name, type=int, default=None)


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    overrides = {
        f.name: getattr(args, f.name)
        for f in fields(PipelineConfig)
        if getattr(args, f.name, None) is not None
    }
    if args.config:
        return PipelineConfig.load(args.config, overrides)
    return PipelineConfig.from_mapping(overrides)


def _require(cfg: PipelineConfig, *names: str) -> None:
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError("missing required setting(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def cmd_index(cfg: PipelineConfig) -> Path:
    """Validate the KG and cache its embeddings under ``index_dir``."""
    _require(cfg, "nodes", "edges")
    kg = load_kg(cfg.nodes, cfg.edges)
    out = Path(cfg.index_dir)
    out.mkdir(parents=True, exist_ok=True)
    walk = cfg.walk
    key = cache_key(kg, walk)
    emb_path = out / "embeddings.tsv"
    if read_cache_key(emb_path) == key and all((out / f).exists() for f in INDEX_FILES):
        log.info("cache hit: %s", emb_path)
        return out
    log.info("training embeddings for %d nodes", len(kg))
    emb = embed_graph(kg, walk)
    write_kg(kg, out / "nodes.tsv", out / "edges.tsv")
    save_embeddings(emb, emb_path, key)
    meta = {
        "key": key,
        "kg_hash": kg.content_hash(),
        "n_nodes": len(kg),
        "n_edges": len(kg.edges),
        "dropped_edges": kg.dropped_edges,
        "walk": asdict(walk),
    }
    (out / "index.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    log.info("index written to %s", out)
    return out


def open_index(cfg: PipelineConfig) -> Linker:
    out = Path(cfg.index_dir)
    missing = [f for f in INDEX_FILES if not (out / f).exists()]
    if missing:
        raise IndexMissing(
            f"no index in {out} (missing {', '.join(missing)}); run `gstned index` with the same --index-dir first"
        )
    kg = load_kg(out / "nodes.tsv", out / "edges.tsv")
    emb = load_embeddings(out / "embeddings.tsv")
    return Linker(kg, emb, cfg)


def cmd_link(cfg: PipelineConfig, trace: bool = False, dump_graphs: bool = False) -> Path:
    _require(cfg, "documents")
    linker = open_index(cfg)
    docs = load_documents(cfg.documents)
    results = link_corpus(linker, docs)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_rankings(results, out / "rankings.jsonl")
    write_solutions(results, out / "solutions.jsonl")
    cfg.dump(out / "config.json")
    if trace:
        write_trace([dict(doc_id=r.doc_id, **t) for r in results for t in r.trace], out / "trace.jsonl")
    if dump_graphs:
        gdir = out / "context"
        gdir.mkdir(exist_ok=True)
        for r in results:
            if r.graph is not None:
                (gdir / f"{r.doc_id}.tsv").write_text(r.graph.dump(), encoding="utf-8")
    n = sum(len(r.rankings) for r in results)
    log.info("linked %d mentions in %d documents -> %s", n, len(results), out)
    return out


def cmd_eval(cfg: PipelineConfig, rankings_path: str | None = None):
    _require(cfg, "documents")
    out = Path(cfg.output_dir)
    rpath = Path(rankings_path) if rankings_path else out / "rankings.jsonl"
    if not rpath.exists():
        raise IndexMissing(f"no rankings at {rpath}; run `gstned link` first")
    docs = load_documents(cfg.documents)
    gold = gold_map(docs)
    if not gold:
        raise EvaluationError(f"evaluation needs gold annotations, and {cfg.documents} has none")
    rankings = [r for _, r in read_rankings(rpath)]
    spath = rpath.with_name("solutions.jsonl")
    sols = read_solutions(spath) if spath.exists() else {}
    exclude = exact_mentions(rpath) if cfg.exclude_exact else ()
    report = evaluate(rankings, gold, sols, exclude)
    out.mkdir(parents=True, exist_ok=True)
    (out / "eval.json").write_text(report.to_json() + "\n", encoding="utf-8")
    (out / "eval.txt").write_text(report.table() + "\n", encoding="utf-8")
    return report


def exact_mentions(path: Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        recs = [json.loads(line) for line in fh if line.strip()]
    return [r["mention_id"] for r in recs if r.get("exact_match")]


def cmd_sweep(cfg: PipelineConfig, thresholds, ks, schemes, held_out_fraction: float):
    _require(cfg, "documents")
    linker = open_index(cfg)
    docs = load_documents(cfg.documents)
    grid = [(t, k, s) for s in schemes for t in thresholds for k in ks]
    rows = sweep(grid, linker, docs, held_out_fraction)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.tsv"
    path.write_text(sweep_tsv(rows), encoding="utf-8")
    return path


def cmd_compare(cfg: PipelineConfig) -> Path:
    _require(cfg, "documents")
    linker = open_index(cfg)
    docs = load_documents(cfg.documents)
    rows, _ = compare_schemes(linker, docs)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "schemes.txt"
    path.write_text(scheme_table(rows), encoding="utf-8")
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gstned", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="validate a KG and cache node embeddings")
    _add_config_flags(p)

    p = sub.add_parser("link", help="rank candidates for every mention")
    _add_config_flags(p)
    p.add_argument("--trace", action="store_true", help="write per-solve statistics to trace.jsonl")
    p.add_argument("--dump-graphs", action="store_true", help="write each context graph under context/")

    p = sub.add_parser("eval", help="score rankings against gold")
    _add_config_flags(p)
    p.add_argument("--rankings", help="rankings.jsonl (default: <output-dir>/rankings.jsonl)")

    p = sub.add_parser("sweep", help="threshold x k grid on a held-out split")
    _add_config_flags(p)
    p.add_argument("--thresholds", type=_floats, default=list(DEFAULT_THRESHOLDS))
    p.add_argument("--ks", type=_ints, default=list(DEFAULT_KS))
    p.add_argument("--schemes", default=Scheme.GST_COUNT.value, help="comma-separated scheme names")
    p.add_argument("--held-out", type=float, default=0.1)

    p = sub.add_parser("compare", help="every ranking scheme on one corpus")
    _add_config_flags(p)

    p = sub.add_parser("synth", help="write a synthetic KG and corpus")
    p.add_argument("out_dir")
    for f in fields(SyntheticParams):
        kind = float if f.name in ("background_degree", "noise", "cross_link_rate") else int
        p.add_argument("--" + f.name.replace("_", "-"), dest=f.name, type=kind, default=f.default)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "synth":
            params = SyntheticParams(**{f.name: getattr(args, f.name) for f in fields(SyntheticParams)})
            for name, path in write_synthetic(params, args.out_dir).items():
                print(f"{name}\t{path}")
            return 0
        cfg = resolve_config(args)
        if args.command == "index":
            print(cmd_index(cfg))
        elif args.command == "link":
            print(cmd_link(cfg, args.trace, args.dump_graphs) / "rankings.jsonl")
        elif args.command == "eval":
            print(cmd_eval(cfg, args.rankings).table())
        elif args.command == "sweep":
            try:
                schemes = [Scheme(s).value for s in args.schemes.split(",")]
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            print(cmd_sweep(cfg, args.thresholds, args.ks, schemes, args.held_out))
        elif args.command == "compare":
            print(cmd_compare(cfg).read_text(encoding="utf-8"), end="")
    except GstNedError as exc:
        print(f"{exc.category}: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
