"""End-to-end linking: candidates -> context graph -> top-k trees -> rankings."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .candidates import (
    DEFAULT_MAX_CANDIDATES,
    DEFAULT_THRESHOLD,
    CandidateIndex,
    CandidateSet,
    Document,
    generate_candidates,
)
from .context import DEFAULT_MAX_HOPS, ContextGraph, build_context_graph
from .embeddings import EmbeddingTable, WalkConfig
from .errors import ConfigError
from .kg import KnowledgeGraph
from .ranker import DEFAULT_SCHEME, RankedCandidates, Scheme, rank
from .solver import DEFAULT_K, MAX_GROUPS, GstSolution, solve_windows

# per-component expansion budget; exact whenever the search ends sooner
DEFAULT_MAX_POPS = 10000

log = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    nodes: Optional[str] = None
    edges: Optional[str] = None
    documents: Optional[str] = None
    index_dir: str = "index"
    output_dir: str = "out"
    fuzzy_threshold: float = DEFAULT_THRESHOLD
    max_candidates: int = DEFAULT_MAX_CANDIDATES
    max_hops: int = DEFAULT_MAX_HOPS
    k: int = DEFAULT_K
    scheme: str = DEFAULT_SCHEME.value
    candidate_only_weight: bool = False
    use_matched_alias: bool = False
    max_groups: int = MAX_GROUPS
    state_cap: Optional[int] = None
    max_pops: Optional[int] = DEFAULT_MAX_POPS
    exclude_exact: bool = False
    seed: int = 0
    workers: int = 1
    dim: int = 64
    walks_per_node: int = 10
    walk_length: int = 20
    return_p: float = 1.0
    inout_q: float = 1.0
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025

    def __post_init__(self):
        if not 0.0 < self.fuzzy_threshold <= 1.0:
            raise ConfigError(f"fuzzy_threshold must be in (0, 1], got {self.fuzzy_threshold}")
        for name in ("max_candidates", "max_hops", "k", "max_groups", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        try:
            Scheme(self.scheme)
        except ValueError:
            raise ConfigError(f"unknown scheme {self.scheme!r}") from None

    @property
    def walk(self) -> WalkConfig:
        try:
            return WalkConfig(
                dim=self.dim,
                walks_per_node=self.walks_per_node,
                walk_length=self.walk_length,
                return_p=self.return_p,
                inout_q=self.inout_q,
                window=self.window,
                negatives=self.negatives,
                epochs=self.epochs,
                learning_rate=self.learning_rate,
                seed=self.seed,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_mapping(cls, data: dict) -> "PipelineConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path, overrides: dict | None = None) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        data.update(overrides or {})
        return cls.from_mapping(data)

    def dump(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


@dataclass
class DocResult:
    doc_id: str
    rankings: list[RankedCandidates]
    solutions: dict[str, GstSolution]
    candidate_sets: list[CandidateSet]
    graph: Optional[ContextGraph] = None
    trace: list = field(default_factory=list)


class Linker:
    """Holds the immutable per-KG state shared by all documents."""

    def __init__(self, kg: KnowledgeGraph, emb: EmbeddingTable, config: PipelineConfig):
        self.kg = kg
        self.emb = emb
        self.config = config
        self.index = CandidateIndex(kg)

    def candidates(self, doc: Document, threshold: float | None = None) -> list[CandidateSet]:
        cfg = self.config
        t = cfg.fuzzy_threshold if threshold is None else threshold
        return [generate_candidates(self.index, m, t, cfg.max_candidates) for m in doc.mentions]

    def link(
        self,
        doc: Document,
        candidate_sets: Sequence[CandidateSet] | None = None,
        k: int | None = None,
        schemes: Sequence[tuple[Scheme, bool]] | None = None,
    ):
        """Link one document.

        With ``schemes`` given, returns ``{(scheme, candidate_only): DocResult}``
        sharing one solve; otherwise a single :class:`DocResult` for the
        configured scheme.
        """
        cfg = self.config
        k = cfg.k if k is None else k
        if candidate_sets is None:
            candidate_sets = self.candidates(doc)
        variants = list(schemes) if schemes else [(Scheme(cfg.scheme), cfg.candidate_only_weight)]
        with_cands = [cs for cs in candidate_sets if cs.candidates]
        graph = None
        per_group: dict[int, GstSolution] = {}
        trace: list = []
        if with_cands:
            graph = build_context_graph(
                self.kg, self.emb, with_cands, cfg.max_hops, cfg.use_matched_alias
            )
            if len(graph.groups) >= 2:
                per_group = solve_windows(
                    graph, k, cfg.max_groups, cfg.state_cap, trace, cfg.max_pops
                )
        out = {}
        for scheme, cand_only in variants:
            rankings, sols = [], {}
            gi = 0
            for cs in candidate_sets:
                mid = cs.mention.mention_id
                if not cs.candidates:
                    rankings.append(RankedCandidates(mid, (), Scheme.FALLBACK_NODE_WEIGHT))
                    continue
                sol = per_group.get(gi)
                group = graph.groups[gi]
                # solutions of windowed documents index groups within the window
                local = gi % cfg.max_groups if len(graph.groups) > cfg.max_groups else gi
                rankings.append(rank(sol, group, graph, scheme, cand_only, local))
                if sol is not None:
                    sols[mid] = sol
                gi += 1
            out[(scheme, cand_only)] = DocResult(
                doc.doc_id, rankings, sols, list(candidate_sets), graph, trace
            )
        return out if schemes else out[variants[0]]


_WORKER: Linker | None = None


def _init_worker(kg, emb, config):
    global _WORKER
    _WORKER = Linker(kg, emb, config)


def _link_in_worker(doc):
    return _WORKER.link(doc)


def link_corpus(linker: Linker, docs: Iterable[Document]) -> list[DocResult]:
    docs = list(docs)
    if linker.config.workers <= 1 or len(docs) < 2:
        return [linker.link(d) for d in docs]
    with ProcessPoolExecutor(
        max_workers=linker.config.workers,
        initializer=_init_worker,
        initargs=(linker.kg, linker.emb, linker.config),
    ) as pool:
        return list(pool.map(_link_in_worker, docs, chunksize=max(1, len(docs) // (4 * linker.config.workers))))


def _json_score(x: float):
    return None if x == float("inf") else x


def write_rankings(results: Iterable[DocResult], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for res in results:
            exact = {cs.mention.mention_id for cs in res.candidate_sets if cs.exact_match}
            for r in res.rankings:
                rec = {
                    "doc_id": res.doc_id,
                    "mention_id": r.mention_id,
                    "ranking": [{"entity": e, "score": _json_score(s)} for e, s in r.ranking],
                    "scheme": r.scheme.value,
                    "exact_match": r.mention_id in exact,
                }
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def read_rankings(path: str | Path) -> list[tuple[str, RankedCandidates]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            ranking = tuple(
                (x["entity"], float("inf") if x["score"] is None else x["score"])
                for x in rec["ranking"]
            )
            out.append((rec["doc_id"], RankedCandidates(rec["mention_id"], ranking, Scheme(rec["scheme"]))))
    return out


def write_solutions(results: Iterable[DocResult], path: str | Path) -> None:
    """One record per document: the trees each mention was ranked from."""
    with open(path, "w", encoding="utf-8") as fh:
        for res in results:
            blocks: list[dict] = []
            seen: dict[int, dict] = {}
            for mid, sol in res.solutions.items():
                block = seen.get(id(sol))
                if block is None:
                    block = {
                        "mentions": [],
                        "complete": sol.complete,
                        "trees": [
                            {"nodes": sorted(t.nodes), "cost": t.cost} for t in sol.trees
                        ],
                    }
                    seen[id(sol)] = block
                    blocks.append(block)
                block["mentions"].append(mid)
            fh.write(json.dumps({"doc_id": res.doc_id, "solutions": blocks}) + "\n")


def read_solutions(path: str | Path) -> dict[str, GstSolution]:
    from .solver import SteinerTree

    out: dict[str, GstSolution] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            for block in rec["solutions"]:
                trees = [
                    SteinerTree(frozenset(t["nodes"]), (), t["cost"], {}) for t in block["trees"]
                ]
                sol = GstSolution(trees, [], [], block["complete"])
                for mid in block["mentions"]:
                    out[mid] = sol
    return out
